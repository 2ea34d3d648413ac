//! Bundled oblivious adversary strategies.
//!
//! Each strategy sees only [`AdversaryView`] and its own seeded generator.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::{Adversary, AdversaryView, FlipPlan, NullAdversary, Phase, Stage};
use crate::protocol::{ProtocolParams, HEADER_BITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversarySpecError {
    #[error("unknown adversary `{0}`")]
    Unknown(String),
    #[error("adversary `{name}` expects {expected}")]
    Parameter {
        name: String,
        expected: &'static str,
    },
}

/// Name and parameter of a bundled strategy, written `name` or `name:param`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdversarySpec {
    Null,
    BudgetedRandom(u64),
    PlaintextCorruptor(usize),
    FingerprintJammer(u64),
    EchoJammer(u64),
    SilenceSpoofer(u64),
}

impl AdversarySpec {
    /// The strategy set exercised by the default sweeps.
    pub fn bundled() -> Vec<AdversarySpec> {
        vec![
            AdversarySpec::Null,
            AdversarySpec::BudgetedRandom(50),
            AdversarySpec::PlaintextCorruptor(10),
            AdversarySpec::FingerprintJammer(1000),
            AdversarySpec::EchoJammer(1000),
            AdversarySpec::SilenceSpoofer(1000),
        ]
    }

    pub fn parse(s: &str) -> Result<Self, AdversarySpecError> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let number = |expected: &'static str| {
            param
                .and_then(|p| p.parse::<u64>().ok())
                .ok_or_else(|| AdversarySpecError::Parameter {
                    name: name.to_string(),
                    expected,
                })
        };
        Ok(match name {
            "null" => {
                if param.is_some() {
                    return Err(AdversarySpecError::Parameter {
                        name: name.into(),
                        expected: "no parameter",
                    });
                }
                AdversarySpec::Null
            }
            "budgeted-random" => AdversarySpec::BudgetedRandom(number("a flip budget")?),
            "plaintext-corruptor" => {
                AdversarySpec::PlaintextCorruptor(number("a tuple count")? as usize)
            }
            "fingerprint-jammer" => AdversarySpec::FingerprintJammer(number("a flip budget")?),
            "echo-jammer" => AdversarySpec::EchoJammer(number("a flip budget")?),
            "silence-spoofer" => AdversarySpec::SilenceSpoofer(number("a flip budget")?),
            _ => return Err(AdversarySpecError::Unknown(name.to_string())),
        })
    }

    pub fn build(&self, seed: u64) -> Box<dyn Adversary> {
        let rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            AdversarySpec::Null => Box::new(NullAdversary),
            AdversarySpec::BudgetedRandom(b) => Box::new(BudgetedRandom::new(b, rng)),
            AdversarySpec::PlaintextCorruptor(k) => Box::new(PlaintextCorruptor::new(k, rng)),
            AdversarySpec::FingerprintJammer(b) => {
                Box::new(SlotJammer::new(Phase::Fingerprint, b, rng))
            }
            AdversarySpec::EchoJammer(b) => Box::new(SlotJammer::new(Phase::Echo, b, rng)),
            AdversarySpec::SilenceSpoofer(b) => Box::new(SilenceSpoofer::new(b)),
        }
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Null => f.write_str("null"),
            AdversarySpec::BudgetedRandom(b) => write!(f, "budgeted-random:{b}"),
            AdversarySpec::PlaintextCorruptor(k) => write!(f, "plaintext-corruptor:{k}"),
            AdversarySpec::FingerprintJammer(b) => write!(f, "fingerprint-jammer:{b}"),
            AdversarySpec::EchoJammer(b) => write!(f, "echo-jammer:{b}"),
            AdversarySpec::SilenceSpoofer(b) => write!(f, "silence-spoofer:{b}"),
        }
    }
}

impl std::str::FromStr for AdversarySpec {
    type Err = AdversarySpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Steps of an undisturbed first round plus one resend, doubled.
fn stage_horizon(message_len: usize, delta: f64) -> u64 {
    let Ok(p) = ProtocolParams::derive(message_len, delta) else {
        return 0;
    };
    let r = p.round(1);
    2 * (p.plaintext_len() + 2 * r.fingerprint_slot + r.b + r.evaluation_slot) as u64
}

/// Spends exactly `B` toggles on a uniformly random set of steps within an
/// early horizon. Undirected noise; mixes fingerprint, AMD and silence
/// failures.
#[derive(Debug, Clone)]
pub struct BudgetedRandom {
    budget: u64,
    horizon: Option<u64>,
    rng: ChaCha8Rng,
}

impl BudgetedRandom {
    pub fn new(budget: u64, rng: ChaCha8Rng) -> Self {
        Self {
            budget,
            horizon: None,
            rng,
        }
    }
}

impl Adversary for BudgetedRandom {
    fn name(&self) -> String {
        format!("budgeted-random:{}", self.budget)
    }

    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
        let horizon = *self.horizon.get_or_insert_with(|| {
            let m = view.message.len();
            match view.slot.stage {
                Stage::Header => {
                    stage_horizon(HEADER_BITS, view.params.delta)
                        + stage_horizon(m, view.params.delta)
                }
                _ => stage_horizon(m, view.params.delta),
            }
        });
        let toggles = (0..view.slot.len as u64)
            .map(|i| {
                let t = view.step_index + i;
                if self.budget == 0 || t >= horizon {
                    return false;
                }
                // Selection sampling: each remaining subset is equally likely.
                let pick = self.rng.random_range(0..horizon - t) < self.budget;
                if pick {
                    self.budget -= 1;
                }
                pick
            })
            .collect();
        FlipPlan {
            toggles,
            free_bit: false,
        }
    }
}

/// Flips the low bit of `k` distinct round-0 evaluations, leaving `k` bad
/// tuples in Bob's multiset. Exercises decoding under bad tuples and the
/// resend loop.
#[derive(Debug, Clone)]
pub struct PlaintextCorruptor {
    tuples: usize,
    rng: ChaCha8Rng,
}

impl PlaintextCorruptor {
    pub fn new(tuples: usize, rng: ChaCha8Rng) -> Self {
        Self { tuples, rng }
    }
}

impl Adversary for PlaintextCorruptor {
    fn name(&self) -> String {
        format!("plaintext-corruptor:{}", self.tuples)
    }

    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
        if view.slot.phase != Phase::Plaintext {
            return FlipPlan::none();
        }
        let k = view.params.field_bits as usize;
        let count = view.slot.len / k;
        let mut toggles = vec![false; view.slot.len];
        for i in index::sample(&mut self.rng, count, self.tuples.min(count)) {
            toggles[i * k] = true;
        }
        FlipPlan {
            toggles,
            free_bit: false,
        }
    }
}

/// Flips each bit of one slot kind with probability 1/2 until the budget is
/// spent. On fingerprint slots this targets AMD errors in Alice's check; on
/// echo slots it targets Bob's echo comparison.
#[derive(Debug, Clone)]
pub struct SlotJammer {
    phase: Phase,
    budget: u64,
    rng: ChaCha8Rng,
}

impl SlotJammer {
    pub fn new(phase: Phase, budget: u64, rng: ChaCha8Rng) -> Self {
        Self { phase, budget, rng }
    }
}

impl Adversary for SlotJammer {
    fn name(&self) -> String {
        match self.phase {
            Phase::Echo => format!("echo-jammer:{}", self.budget),
            _ => format!("fingerprint-jammer:{}", self.budget),
        }
    }

    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
        if view.slot.phase != self.phase {
            return FlipPlan::none();
        }
        let toggles = (0..view.slot.len)
            .map(|_| {
                let pick = self.budget > 0 && self.rng.random::<bool>();
                if pick {
                    self.budget -= 1;
                }
                pick
            })
            .collect();
        FlipPlan {
            toggles,
            free_bit: false,
        }
    }
}

/// Pays to alternate the delivered bit on every other step of each
/// resend-request slot, so silence reads as a request. Targets unintended
/// silence detection: it keeps Alice sending after Bob has left.
#[derive(Debug, Clone)]
pub struct SilenceSpoofer {
    budget: u64,
}

impl SilenceSpoofer {
    pub fn new(budget: u64) -> Self {
        Self { budget }
    }
}

impl Adversary for SilenceSpoofer {
    fn name(&self) -> String {
        format!("silence-spoofer:{}", self.budget)
    }

    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
        if view.slot.phase != Phase::ResendRequest {
            return FlipPlan::none();
        }
        let toggles = (0..view.slot.len)
            .map(|i| {
                let pick = i % 2 == 1 && self.budget > 0;
                if pick {
                    self.budget -= 1;
                }
                pick
            })
            .collect();
        FlipPlan {
            toggles,
            free_bit: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_roundtrip() {
        for spec in AdversarySpec::bundled() {
            assert_eq!(spec.to_string().parse::<AdversarySpec>(), Ok(spec));
            assert_eq!(spec.build(1).name(), spec.to_string());
        }
        assert!(matches!(
            AdversarySpec::parse("gremlin:3"),
            Err(AdversarySpecError::Unknown(_))
        ));
        assert!(matches!(
            AdversarySpec::parse("echo-jammer"),
            Err(AdversarySpecError::Parameter { .. })
        ));
    }
}
