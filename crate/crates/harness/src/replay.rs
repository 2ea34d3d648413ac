//! Regenerates the channel transcript of a sweep row.

use robust_send::adversary::AdversarySpecError;
use robust_send::channel::export_transcript;
use thiserror::Error;

use crate::sweep::{run_trial, SweepError, SweepRow};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Config(#[from] AdversarySpecError),
    #[error(transparent)]
    Run(#[from] SweepError),
    #[error("replay of seed {seed} does not reproduce the row ({field} differs)")]
    Mismatch { seed: u64, field: &'static str },
}

/// Reruns `row` with recording on and returns its transcript. Fails if the
/// rerun disagrees with the row, which means a different configuration or
/// build produced it.
pub fn replay_transcript(row: &SweepRow) -> Result<String, ReplayError> {
    let spec = row.trial()?;
    let report = run_trial(&spec, true)?;
    let mismatch = |field| ReplayError::Mismatch {
        seed: row.seed,
        field,
    };
    if report.flips != row.flips {
        return Err(mismatch("T"));
    }
    if report.total_sent() != row.total_sent {
        return Err(mismatch("totalSent"));
    }
    if report.rounds != row.rounds {
        return Err(mismatch("rounds"));
    }
    if report.success() != row.success {
        return Err(mismatch("success"));
    }
    let steps = report.transcript.expect("recording was requested");
    Ok(export_transcript(&steps))
}
