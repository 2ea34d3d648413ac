//! Seeded trials over a parameter grid, with CSV output.

use std::collections::BTreeMap;
use std::io;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_send::adversary::{AdversarySpec, AdversarySpecError};
use robust_send::protocol::{
    run_known_l, run_unknown_l, HeadlineConstants, ProtocolError, RunOptions, RunReport, RunSeeds,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Adversary(#[from] AdversarySpecError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Everything needed to rerun one trial bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub message_len: usize,
    pub delta: f64,
    pub adversary: AdversarySpec,
    pub seed: u64,
    pub unknown_length: bool,
    pub max_rounds: Option<u64>,
}

/// The message of a trial, drawn from its seed.
pub fn trial_message(len: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_7373_6167_6521);
    (0..len).map(|_| rng.random()).collect()
}

pub fn run_trial(spec: &TrialSpec, record_transcript: bool) -> Result<RunReport, SweepError> {
    let message = trial_message(spec.message_len, spec.seed);
    let seeds = RunSeeds::from_master(spec.seed);
    let mut adversary = spec.adversary.build(seeds.adversary);
    let options = RunOptions {
        max_rounds: spec.max_rounds,
        record_transcript,
        ..RunOptions::default()
    };
    let run = if spec.unknown_length {
        run_unknown_l
    } else {
        run_known_l
    };
    Ok(run(
        &message,
        spec.delta,
        adversary.as_mut(),
        seeds,
        options,
    )?)
}

/// One CSV row per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub message_len: usize,
    pub delta: f64,
    pub adversary: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub flips: u64,
    #[serde(rename = "totalSent")]
    pub total_sent: u64,
    pub rounds: u64,
    pub success: bool,
    #[serde(rename = "boundSatisfied")]
    pub bound_satisfied: bool,
    pub outcome: String,
    #[serde(rename = "tuplesSent")]
    pub tuples_sent: u64,
    #[serde(rename = "unknownLength")]
    pub unknown_length: bool,
    #[serde(rename = "maxRounds")]
    pub max_rounds: Option<u64>,
    #[serde(rename = "learnedL")]
    pub learned_len: Option<u64>,
    #[serde(rename = "badTupleViolations")]
    pub bad_tuple_violations: u64,
}

impl SweepRow {
    pub fn from_report(
        spec: &TrialSpec,
        report: &RunReport,
        constants: &HeadlineConstants,
    ) -> Self {
        Self {
            message_len: spec.message_len,
            delta: spec.delta,
            adversary: spec.adversary.to_string(),
            seed: spec.seed,
            flips: report.flips,
            total_sent: report.total_sent(),
            rounds: report.rounds,
            success: report.success(),
            bound_satisfied: report.total_sent() as f64
                <= constants.bound(spec.message_len, report.flips, spec.delta),
            outcome: report.outcome.as_str().into(),
            tuples_sent: report.tuples_sent,
            unknown_length: spec.unknown_length,
            max_rounds: spec.max_rounds,
            learned_len: report.learned_len,
            bad_tuple_violations: report.bad_tuple_violations.len() as u64,
        }
    }

    pub fn trial(&self) -> Result<TrialSpec, AdversarySpecError> {
        Ok(TrialSpec {
            message_len: self.message_len,
            delta: self.delta,
            adversary: self.adversary.parse()?,
            seed: self.seed,
            unknown_length: self.unknown_length,
            max_rounds: self.max_rounds,
        })
    }

    pub fn aborted(&self) -> bool {
        self.outcome == "aborted"
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Trial specs of the grid, in row order: `L`, then `delta`, then
/// adversary, then trial. Seeds come from one stream keyed by `config.seed`.
pub fn grid(config: &ExperimentConfig) -> Vec<TrialSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    for &message_len in &config.lengths {
        for &delta in &config.deltas {
            for &adversary in &config.adversaries {
                for _ in 0..config.trials {
                    out.push(TrialSpec {
                        message_len,
                        delta,
                        adversary,
                        seed: rng.next_u64(),
                        unknown_length: config.unknown_length,
                        max_rounds: config.max_rounds,
                    });
                }
            }
        }
    }
    out
}

/// Runs every trial; writes the CSV when `config.out` is set.
pub fn run_sweep(
    config: &ExperimentConfig,
    constants: &HeadlineConstants,
) -> Result<SweepResult, SweepError> {
    config.validate()?;
    let rows = grid(config)
        .iter()
        .map(|spec| {
            Ok(SweepRow::from_report(
                spec,
                &run_trial(spec, false)?,
                constants,
            ))
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    let result = SweepResult { rows };
    if let Some(path) = &config.out {
        write_csv(&result.rows, std::fs::File::create(path)?)?;
    }
    Ok(result)
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Aggregate of one `(L, delta, adversary)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub message_len: usize,
    pub delta: f64,
    pub adversary: String,
    pub trials: u64,
    pub failures: u64,
    pub aborted: u64,
    pub mean_sent: f64,
    pub mean_flips: f64,
}

impl CellSummary {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// `delta + 3 sigma` with `sigma = sqrt(delta (1 - delta) / trials)`.
    pub fn failure_threshold(&self) -> f64 {
        self.delta + 3.0 * (self.delta * (1.0 - self.delta) / self.trials as f64).sqrt()
    }

    pub fn within_delta(&self) -> bool {
        self.failure_rate() <= self.failure_threshold()
    }
}

/// Aborted runs count as failures here; the protocol gives no guarantee
/// about a run cut short.
pub fn summarize(rows: &[SweepRow]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(usize, u64, String), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        cells
            .entry((r.message_len, r.delta.to_bits(), r.adversary.clone()))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((message_len, delta, adversary), rs)| {
            let n = rs.len() as f64;
            CellSummary {
                message_len,
                delta: f64::from_bits(delta),
                adversary,
                trials: rs.len() as u64,
                failures: rs.iter().filter(|r| !r.success).count() as u64,
                aborted: rs.iter().filter(|r| r.aborted()).count() as u64,
                mean_sent: rs.iter().map(|r| r.total_sent as f64).sum::<f64>() / n,
                mean_flips: rs.iter().map(|r| r.flips as f64).sum::<f64>() / n,
            }
        })
        .collect()
}
