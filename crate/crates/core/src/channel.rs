//! Synchronous binary channel with silence semantics and a pluggable adversary.
//!
//! Time advances one bit per step. In a step where a party transmits, the
//! adversary may flip the bit at a cost of one. In a step where nobody
//! transmits, the first step of the silent run delivers a bit of the
//! adversary's choosing for free; afterwards the delivered bit repeats unless
//! the adversary pays one flip to toggle it.
//!
//! The adversary plans one slot at a time from an [`AdversaryView`], which
//! only carries public information.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("both parties transmitted in step {0}")]
    Desync(u64),
    #[error("slot of {expected} steps was given {got} bits")]
    SlotLength { expected: usize, got: usize },
    #[error("empty slot")]
    EmptySlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "A",
            Party::Bob => "B",
        })
    }
}

/// Which sub-protocol a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// A single run with `L` known to both sides.
    Known,
    /// Length header of the unknown-length composition.
    Header,
    /// Message phase of the unknown-length composition.
    Message,
}

/// Slot kinds of the round calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// Round 0: the first `d + 1` evaluations in the clear.
    Plaintext,
    /// Bob to Alice: encoded fingerprint.
    Fingerprint,
    /// Alice to Bob: echo or zeros.
    Echo,
    /// Bob to Alice: random bits or silence.
    ResendRequest,
    /// Alice to Bob: two more encoded evaluations.
    EvaluationResend,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Plaintext => "plaintext",
            Phase::Fingerprint => "fingerprint",
            Phase::Echo => "echo",
            Phase::ResendRequest => "resend-request",
            Phase::EvaluationResend => "evaluation-resend",
        }
    }
}

/// Ledger and transcript key: stage plus slot kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseLabel {
    pub stage: Stage,
    pub phase: Phase,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Stage::Known => f.write_str(self.phase.as_str()),
            Stage::Header => write!(f, "header/{}", self.phase.as_str()),
            Stage::Message => write!(f, "message/{}", self.phase.as_str()),
        }
    }
}

/// Public description of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotMeta {
    pub stage: Stage,
    pub round: u64,
    pub phase: Phase,
    pub len: usize,
}

impl SlotMeta {
    pub fn label(&self) -> PhaseLabel {
        PhaseLabel {
            stage: self.stage,
            phase: self.phase,
        }
    }
}

/// Parameters anyone can compute from the algorithm and `(L, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublicParams {
    pub message_len: usize,
    pub delta: f64,
    pub field_bits: u32,
    pub degree: usize,
}

/// What the adversary did in one past slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRecord {
    pub slot: SlotMeta,
    pub first_step: u64,
    pub planned_toggles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Visibility {
    /// The adversary never sees channel contents.
    #[default]
    Oblivious,
    /// Stress-testing only: the adversary sees the bits being sent.
    Omniscient,
}

/// Everything the adversary may base a decision on.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryView<'a> {
    pub params: PublicParams,
    pub message: &'a [bool],
    pub history: &'a [SlotRecord],
    pub step_index: u64,
    pub slot: SlotMeta,
    /// Bits being sent this slot; `None` unless the channel is omniscient.
    pub observed: Option<&'a [bool]>,
}

/// Per-step decisions for one slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlipPlan {
    /// `toggles[i]`: flip the sent bit of step `i`, or pay to change the
    /// silent bit. Missing entries mean no action.
    pub toggles: Vec<bool>,
    /// Delivered value of the first step of a silent run.
    pub free_bit: bool,
}

impl FlipPlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn toggle(&self, i: usize) -> bool {
        self.toggles.get(i).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.toggles.iter().filter(|&&t| t).count()
    }
}

pub trait Adversary {
    fn name(&self) -> String;

    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan;
}

/// Never interferes; silent runs read as zeros.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullAdversary;

impl Adversary for NullAdversary {
    fn name(&self) -> String {
        "null".into()
    }

    fn plan(&mut self, _view: &AdversaryView<'_>) -> FlipPlan {
        FlipPlan::none()
    }
}

/// Adversary charges, total and by phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlipLedger {
    total: u64,
    per_phase: BTreeMap<PhaseLabel, u64>,
}

impl FlipLedger {
    pub fn charge(&mut self, label: PhaseLabel) {
        self.total += 1;
        *self.per_phase.entry(label).or_insert(0) += 1;
    }

    /// `T`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn per_phase(&self) -> &BTreeMap<PhaseLabel, u64> {
        &self.per_phase
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelStep {
    pub index: u64,
    pub sender: Option<Party>,
    pub sent: Option<bool>,
    pub delivered: bool,
    /// The adversary toggled this step (a flip or a paid silence change).
    pub flipped: bool,
    /// The ledger was charged for this step.
    pub charged: bool,
    pub label: PhaseLabel,
}

/// True iff `s` has fewer than `|s| / 3` bit alternations.
pub fn is_silent(s: &[bool]) -> bool {
    alternations(s) * 3 < s.len()
}

pub fn alternations(s: &[bool]) -> usize {
    s.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The shared medium of one simulated run.
pub struct Channel<'a> {
    adversary: &'a mut dyn Adversary,
    visibility: Visibility,
    params: PublicParams,
    message: Vec<bool>,
    history: Vec<SlotRecord>,
    step: u64,
    last_delivered: bool,
    in_silent_run: bool,
    ledger: FlipLedger,
    sent: BTreeMap<(Party, PhaseLabel), u64>,
    transcript: Option<Vec<ChannelStep>>,
}

impl<'a> Channel<'a> {
    pub fn new(adversary: &'a mut dyn Adversary, params: PublicParams, message: &[bool]) -> Self {
        Self {
            adversary,
            visibility: Visibility::Oblivious,
            params,
            message: message.to_vec(),
            history: Vec::new(),
            step: 0,
            last_delivered: false,
            in_silent_run: false,
            ledger: FlipLedger::default(),
            sent: BTreeMap::new(),
            transcript: None,
        }
    }

    pub fn with_visibility(mut self, visibility: Visibility) -> Self {
        self.visibility = visibility;
        self
    }

    /// Keep a per-step transcript.
    pub fn recording(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    /// Switches the public parameters, e.g. between stages of a composed run.
    pub fn set_params(&mut self, params: PublicParams) {
        self.params = params;
    }

    pub fn params(&self) -> PublicParams {
        self.params
    }

    pub fn ledger(&self) -> &FlipLedger {
        &self.ledger
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn transcript(&self) -> Option<&[ChannelStep]> {
        self.transcript.as_deref()
    }

    pub fn take_transcript(&mut self) -> Option<Vec<ChannelStep>> {
        self.transcript.take()
    }

    /// Bits transmitted by `party` so far.
    pub fn bits_sent(&self, party: Party) -> u64 {
        self.sent
            .iter()
            .filter(|((p, _), _)| *p == party)
            .map(|(_, n)| n)
            .sum()
    }

    /// Bits transmitted per phase label, both parties combined.
    pub fn bits_sent_per_phase(&self) -> BTreeMap<PhaseLabel, u64> {
        let mut out = BTreeMap::new();
        for ((_, label), n) in &self.sent {
            *out.entry(*label).or_insert(0) += n;
        }
        out
    }

    /// One channel step. At most one of `alice`/`bob` may carry a bit.
    pub fn step_transmit(
        &mut self,
        alice: Option<bool>,
        bob: Option<bool>,
        toggle: bool,
        free_bit: bool,
        label: PhaseLabel,
    ) -> Result<bool, ChannelError> {
        let (sender, sent) = match (alice, bob) {
            (Some(_), Some(_)) => return Err(ChannelError::Desync(self.step)),
            (Some(b), None) => (Some(Party::Alice), Some(b)),
            (None, Some(b)) => (Some(Party::Bob), Some(b)),
            (None, None) => (None, None),
        };
        let (delivered, flipped, charged) = match sent {
            Some(bit) => {
                self.in_silent_run = false;
                *self.sent.entry((sender.unwrap(), label)).or_insert(0) += 1;
                (bit ^ toggle, toggle, toggle)
            }
            None if !self.in_silent_run => {
                self.in_silent_run = true;
                (free_bit, false, false)
            }
            None => (self.last_delivered ^ toggle, toggle, toggle),
        };
        if charged {
            self.ledger.charge(label);
        }
        if let Some(t) = self.transcript.as_mut() {
            t.push(ChannelStep {
                index: self.step,
                sender,
                sent,
                delivered,
                flipped,
                charged,
                label,
            });
        }
        self.last_delivered = delivered;
        self.step += 1;
        Ok(delivered)
    }

    /// Runs one slot: `sender` transmits `bits` (or nobody does) and the
    /// listener receives the returned `slot.len` delivered bits.
    pub fn listen(
        &mut self,
        sender: Option<(Party, &[bool])>,
        slot: SlotMeta,
    ) -> Result<Vec<bool>, ChannelError> {
        if slot.len == 0 {
            return Err(ChannelError::EmptySlot);
        }
        if let Some((_, bits)) = sender {
            if bits.len() != slot.len {
                return Err(ChannelError::SlotLength {
                    expected: slot.len,
                    got: bits.len(),
                });
            }
        }
        let plan = {
            let observed = match (self.visibility, sender) {
                (Visibility::Omniscient, Some((_, bits))) => Some(bits),
                _ => None,
            };
            let view = AdversaryView {
                params: self.params,
                message: &self.message,
                history: &self.history,
                step_index: self.step,
                slot,
                observed,
            };
            self.adversary.plan(&view)
        };
        self.history.push(SlotRecord {
            slot,
            first_step: self.step,
            planned_toggles: plan.count(),
        });
        let label = slot.label();
        let mut out = Vec::with_capacity(slot.len);
        for i in 0..slot.len {
            let (alice, bob) = match sender {
                Some((Party::Alice, bits)) => (Some(bits[i]), None),
                Some((Party::Bob, bits)) => (None, Some(bits[i])),
                None => (None, None),
            };
            out.push(self.step_transmit(alice, bob, plan.toggle(i), plan.free_bit, label)?);
        }
        Ok(out)
    }
}

/// Renders a transcript, one line per step:
/// `index,sender,sent,delivered,flipped,charge,phase`.
pub fn export_transcript(steps: &[ChannelStep]) -> String {
    let mut out = String::from("index,sender,sent,delivered,flipped,charge,phase\n");
    for s in steps {
        let sender = s.sender.map_or("-".to_string(), |p| p.to_string());
        let sent = s.sent.map_or("-", |b| if b { "1" } else { "0" });
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.index, sender, sent, s.delivered as u8, s.flipped as u8, s.charged as u8, s.label
        )
        .expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PublicParams {
        PublicParams {
            message_len: 8,
            delta: 0.1,
            field_bits: 3,
            degree: 2,
        }
    }

    fn slot(phase: Phase, len: usize) -> SlotMeta {
        SlotMeta {
            stage: Stage::Known,
            round: 1,
            phase,
            len,
        }
    }

    /// Replays fixed plans in order.
    struct Scripted(Vec<FlipPlan>);

    impl Adversary for Scripted {
        fn name(&self) -> String {
            "scripted".into()
        }
        fn plan(&mut self, _view: &AdversaryView<'_>) -> FlipPlan {
            if self.0.is_empty() {
                FlipPlan::none()
            } else {
                self.0.remove(0)
            }
        }
    }

    #[test]
    fn passive_adversary_delivers() {
        let mut adv = NullAdversary;
        let mut ch = Channel::new(&mut adv, params(), &[]);
        let bit = ch
            .step_transmit(Some(true), None, false, false, slot(Phase::Echo, 1).label())
            .unwrap();
        assert!(bit);
        assert_eq!(ch.ledger().total(), 0);
        let s = [true, false, true, true];
        let got = ch
            .listen(Some((Party::Bob, &s)), slot(Phase::Fingerprint, 4))
            .unwrap();
        assert_eq!(got, s);
        assert_eq!(ch.bits_sent(Party::Bob), 4);
        assert_eq!(ch.bits_sent(Party::Alice), 1);
    }

    #[test]
    fn free_first_silent_bit() {
        let mut adv = Scripted(vec![
            FlipPlan::none(),
            FlipPlan {
                toggles: vec![],
                free_bit: false,
            },
        ]);
        let mut ch = Channel::new(&mut adv, params(), &[]);
        ch.listen(Some((Party::Alice, &[true])), slot(Phase::Echo, 1))
            .unwrap();
        let got = ch.listen(None, slot(Phase::ResendRequest, 3)).unwrap();
        assert_eq!(got, vec![false; 3]);
        assert_eq!(ch.ledger().total(), 0);
    }

    #[test]
    fn paid_silence_change() {
        let mut adv = Scripted(vec![FlipPlan {
            toggles: vec![false, true, false, false],
            free_bit: true,
        }]);
        let mut ch = Channel::new(&mut adv, params(), &[]).recording();
        let got = ch.listen(None, slot(Phase::ResendRequest, 4)).unwrap();
        assert_eq!(got, vec![true, false, false, false]);
        assert_eq!(ch.ledger().total(), 1);
        let t = ch.transcript().unwrap();
        assert!(t[1].charged && t[1].flipped);
        assert!(!t[0].charged);
    }

    #[test]
    fn silent_run_spans_slots() {
        let mut adv = Scripted(vec![
            FlipPlan {
                toggles: vec![],
                free_bit: true,
            },
            // The run continues, so this free bit is not consulted.
            FlipPlan {
                toggles: vec![],
                free_bit: false,
            },
        ]);
        let mut ch = Channel::new(&mut adv, params(), &[]);
        ch.listen(None, slot(Phase::ResendRequest, 2)).unwrap();
        let got = ch.listen(None, slot(Phase::EvaluationResend, 2)).unwrap();
        assert_eq!(got, vec![true, true]);
    }

    #[test]
    fn flips_on_transmission() {
        let mut adv = Scripted(vec![FlipPlan {
            toggles: vec![false, false, true],
            free_bit: false,
        }]);
        let mut ch = Channel::new(&mut adv, params(), &[]);
        let s = [true, true, true, false];
        let got = ch
            .listen(Some((Party::Alice, &s)), slot(Phase::Plaintext, 4))
            .unwrap();
        assert_eq!(got, vec![true, true, false, false]);
        assert_eq!(ch.ledger().total(), 1);
        let label = slot(Phase::Plaintext, 1).label();
        assert_eq!(ch.ledger().per_phase()[&label], 1);
    }

    #[test]
    fn desync_and_framing_errors() {
        let mut adv = NullAdversary;
        let mut ch = Channel::new(&mut adv, params(), &[]);
        let label = slot(Phase::Echo, 1).label();
        assert_eq!(
            ch.step_transmit(Some(true), Some(false), false, false, label),
            Err(ChannelError::Desync(0))
        );
        assert_eq!(
            ch.listen(Some((Party::Alice, &[true])), slot(Phase::Echo, 2)),
            Err(ChannelError::SlotLength {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn silence_predicate() {
        assert!(is_silent(&[false; 71]));
        let alt: Vec<bool> = (0..71).map(|i| i % 2 == 1).collect();
        assert_eq!(alternations(&alt), 70);
        assert!(!is_silent(&alt));
        // 6 bits, 2 alternations: 2 < 2 is false.
        let s = [false, false, true, true, false, false];
        assert_eq!(alternations(&s), 2);
        assert!(!is_silent(&s));
        assert!(is_silent(&[true]));
    }

    #[test]
    fn omniscient_view_sees_bits() {
        struct Peek(Option<Vec<bool>>);
        impl Adversary for Peek {
            fn name(&self) -> String {
                "peek".into()
            }
            fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
                self.0 = view.observed.map(<[bool]>::to_vec);
                FlipPlan::none()
            }
        }
        let s = [true, false];
        let mut adv = Peek(None);
        let mut ch = Channel::new(&mut adv, params(), &[]);
        ch.listen(Some((Party::Bob, &s)), slot(Phase::Fingerprint, 2))
            .unwrap();
        drop(ch);
        assert_eq!(adv.0, None);
        let mut ch = Channel::new(&mut adv, params(), &[]).with_visibility(Visibility::Omniscient);
        ch.listen(Some((Party::Bob, &s)), slot(Phase::Fingerprint, 2))
            .unwrap();
        drop(ch);
        assert_eq!(adv.0, Some(s.to_vec()));
    }

    #[test]
    fn transcript_export_columns() {
        let mut adv = NullAdversary;
        let mut ch = Channel::new(&mut adv, params(), &[]).recording();
        ch.listen(Some((Party::Alice, &[true])), slot(Phase::Echo, 1))
            .unwrap();
        ch.listen(None, slot(Phase::ResendRequest, 1)).unwrap();
        let text = export_transcript(ch.transcript().unwrap());
        assert_eq!(
            text,
            "index,sender,sent,delivered,flipped,charge,phase\n\
             0,A,1,1,0,0,echo\n\
             1,-,-,0,0,0,resend-request\n"
        );
    }
}
