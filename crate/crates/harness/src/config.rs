//! Experiment configuration and the flat `key = value` config file.

use std::path::PathBuf;

use robust_send::adversary::AdversarySpec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {value}")]
    Value { key: String, value: String },
    #[error(transparent)]
    Adversary(#[from] robust_send::adversary::AdversarySpecError),
    #[error("trials must be at least 1")]
    Trials,
    #[error("delta {0} is outside (0, 1)")]
    Delta(f64),
    #[error("empty {0} list")]
    Empty(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lengths: Vec<usize>,
    pub deltas: Vec<f64>,
    pub adversaries: Vec<AdversarySpec>,
    pub trials: u64,
    pub seed: u64,
    pub max_rounds: Option<u64>,
    pub out: Option<PathBuf>,
    /// Run the two-phase composition instead of the known-length protocol.
    pub unknown_length: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lengths: vec![64, 256, 1000, 4096],
            deltas: vec![0.1, 0.01],
            adversaries: AdversarySpec::bundled(),
            trials: 1000,
            seed: 1,
            max_rounds: None,
            out: None,
            unknown_length: false,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| ConfigError::Value {
                key: key.into(),
                value: s.into(),
            })
        })
        .collect()
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        value: value.into(),
    })
}

impl ExperimentConfig {
    /// Applies one setting. Keys mirror the command-line flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key.trim() {
            "L" => self.lengths = list(key, value)?,
            "delta" => self.deltas = list(key, value)?,
            "adversary" => {
                self.adversaries = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(AdversarySpec::parse)
                    .collect::<Result<_, _>>()?
            }
            "trials" => self.trials = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "max-rounds" => self.max_rounds = Some(scalar(key, value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "unknown-length" => self.unknown_length = scalar(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Parses a config file. Blank lines and `#` comments are ignored.
    pub fn parse_file(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_file(text)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Trials);
        }
        if let Some(&d) = self.deltas.iter().find(|&&d| !(d > 0.0 && d < 1.0)) {
            return Err(ConfigError::Delta(d));
        }
        if self.lengths.is_empty() {
            return Err(ConfigError::Empty("L"));
        }
        if self.deltas.is_empty() {
            return Err(ConfigError::Empty("delta"));
        }
        if self.adversaries.is_empty() {
            return Err(ConfigError::Empty("adversary"));
        }
        Ok(())
    }
}
