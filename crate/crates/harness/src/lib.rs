//! Experiment harness: parameter sweeps, bound checks, Monte Carlo
//! validation and transcript replay for `robust-send`.

pub mod bounds;
pub mod config;
pub mod replay;
pub mod sweep;
pub mod validate;
