//! Reliable transfer of an `L`-bit message between two parties over a
//! binary channel whose adversary flips an unknown but finite number of bits.
//!
//! The coding primitives live in [`field`], [`rscode`], [`integrity`] and
//! [`blockcode`]; [`channel`] simulates the medium, [`protocol`] runs the
//! parties and [`adversary`] holds bundled attack strategies.

pub mod adversary;
pub mod bits;
pub mod blockcode;
pub mod channel;
pub mod field;
pub mod integrity;
pub mod protocol;
pub mod rscode;
