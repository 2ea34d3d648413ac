//! The two-party protocol: parameters, round schedule, the Alice and Bob
//! state machines, simulated runs, and analytic cost bounds.
//!
//! Round 0 sends `d + 1` evaluations of Alice's message polynomial in the
//! clear. Every later round has four slots:
//!
//! 1. Bob sends an encoded fingerprint of his current estimate.
//! 2. Alice echoes it if it matches her polynomial, else sends zeros.
//! 3. Bob goes silent if the echo matched (and terminates), else sends
//!    random bits asking for more evaluations.
//! 4. If Alice heard a request, she sends two more encoded evaluations.
//!
//! Alice terminates once she hears silence in slot 3.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits;
use crate::blockcode::{self, CODE_PARAMS};
use crate::channel::{
    self, Adversary, Channel, ChannelError, ChannelStep, Party, Phase, PublicParams, SlotMeta,
    Stage, Visibility,
};
use crate::field::{Field, FieldSpec};
use crate::integrity::{self, AmdCodeword, AmdParams, Fingerprint, FingerprintParams};
use crate::rscode::{self, EvaluationTuple, Polynomial, TupleMultiset};

/// Lower limit on the slot-length constant.
pub const MIN_CONSTANT: u64 = 19;

/// Width of the length header in the unknown-length composition.
pub const HEADER_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("delta {0} is outside (0, 1)")]
    Delta(f64),
    #[error("message length {0} is unsupported")]
    Length(usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Smallest `n` with `2^n >= x`, for `x > 0`.
fn ceil_log2(x: f64) -> u64 {
    let mut n = x.log2().ceil().max(0.0) as i32;
    while n > 0 && 2f64.powi(n - 1) >= x {
        n -= 1;
    }
    while 2f64.powi(n) < x {
        n += 1;
    }
    n as u64
}

fn ceil_log2_int(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Parameters both parties derive from `(L, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    message_len: usize,
    padded_len: usize,
    delta: f64,
    field_bits: u32,
    degree: usize,
    constant: u64,
    log_term: u64,
}

impl ProtocolParams {
    pub fn derive(message_len: usize, delta: f64) -> Result<Self, ProtocolError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ProtocolError::Delta(delta));
        }
        if message_len == 0 || message_len > (1usize << 40) {
            return Err(ProtocolError::Length(message_len));
        }
        let padded_len = message_len.max(2);
        let field_bits = ceil_log2_int(padded_len as u64);
        let degree = (padded_len.div_ceil(field_bits as usize) - 1).max(1);
        let log_term = ceil_log2(6.0 * padded_len as f64 * degree as f64 / delta);
        let mut params = Self {
            message_len,
            padded_len,
            delta,
            field_bits,
            degree,
            constant: MIN_CONSTANT,
            log_term,
        };
        let first = params.log_term_at(1);
        let realized = params
            .fingerprint_encoded_len(1)
            .max(params.evaluation_encoded_len(1)) as u64;
        params.constant = MIN_CONSTANT.max(realized.div_ceil(first));
        Ok(params)
    }

    /// `L`.
    pub fn message_len(&self) -> usize {
        self.message_len
    }

    /// `L` raised to at least 2; the length the polynomial actually carries.
    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `log q`.
    pub fn field_bits(&self) -> u32 {
        self.field_bits
    }

    pub fn q(&self) -> u64 {
        1u64 << self.field_bits
    }

    /// `d`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `C`.
    pub fn constant(&self) -> u64 {
        self.constant
    }

    /// `ceil(log(6 L d / delta))`.
    pub fn log_term(&self) -> u64 {
        self.log_term
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec::new(self.field_bits).expect("field degree is within range")
    }

    /// Bits of the canonical coefficient serialization of the polynomial.
    pub fn polynomial_bits(&self) -> usize {
        (self.degree + 1) * self.field_bits as usize
    }

    /// Length of round 0.
    pub fn plaintext_len(&self) -> usize {
        self.polynomial_bits()
    }

    pub fn public(&self) -> PublicParams {
        PublicParams {
            message_len: self.message_len,
            delta: self.delta,
            field_bits: self.field_bits,
            degree: self.degree,
        }
    }

    /// `ceil(log(L / eta_j))`.
    pub fn log_term_at(&self, j: u64) -> u64 {
        self.log_term + j / self.degree as u64
    }

    pub fn eta(&self, j: u64) -> f64 {
        let halvings = (j / self.degree as u64).min(i32::MAX as u64) as i32;
        0.5f64.powi(halvings) * self.delta / (6.0 * self.degree as f64)
    }

    fn fingerprint_params(&self, j: u64) -> FingerprintParams {
        FingerprintParams::new(self.polynomial_bits(), self.eta(j)).expect("eta is in (0, 1)")
    }

    fn fingerprint_amd(&self, j: u64) -> AmdParams {
        AmdParams::new(self.fingerprint_params(j).encoded_len(), self.eta(j))
            .expect("eta is in (0, 1)")
    }

    fn evaluation_amd(&self, j: u64) -> AmdParams {
        AmdParams::new(2 * self.field_bits as usize, self.eta(j)).expect("eta is in (0, 1)")
    }

    fn fingerprint_encoded_len(&self, j: u64) -> usize {
        blockcode::encoded_len(self.fingerprint_amd(j).encoded_len())
    }

    fn evaluation_encoded_len(&self, j: u64) -> usize {
        blockcode::encoded_len(self.evaluation_amd(j).encoded_len())
    }

    pub fn round(&self, j: u64) -> RoundParams {
        assert!(j >= 1, "rounds are numbered from 1");
        let b = self.constant * self.log_term_at(j);
        let fingerprint = self.fingerprint_params(j);
        let fingerprint_amd = self.fingerprint_amd(j);
        let evaluation_amd = self.evaluation_amd(j);
        RoundParams {
            j,
            eta: self.eta(j),
            b: b as usize,
            fingerprint,
            fingerprint_amd,
            evaluation_amd,
            fingerprint_slot: (b as usize)
                .max(blockcode::encoded_len(fingerprint_amd.encoded_len())),
            evaluation_slot: (b as usize).max(blockcode::encoded_len(evaluation_amd.encoded_len())),
        }
    }
}

/// Schedule of round `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundParams {
    pub j: u64,
    pub eta: f64,
    pub b: usize,
    pub fingerprint: FingerprintParams,
    pub fingerprint_amd: AmdParams,
    pub evaluation_amd: AmdParams,
    /// Length of slots 1 and 2.
    pub fingerprint_slot: usize,
    /// Length of slot 4. Slot 3 has length `b`.
    pub evaluation_slot: usize,
}

fn pad(mut bits: Vec<bool>, len: usize) -> Vec<bool> {
    debug_assert!(bits.len() <= len);
    bits.resize(len, false);
    bits
}

/// Sender side.
#[derive(Debug, Clone)]
pub struct Alice {
    params: ProtocolParams,
    field: Field,
    poly: Polynomial,
    poly_bits: Vec<bool>,
    round: u64,
    next_x: u64,
    terminated: bool,
    rng: ChaCha8Rng,
}

impl Alice {
    /// `message` must have `params.message_len()` bits.
    pub fn new(params: ProtocolParams, message: &[bool], rng: ChaCha8Rng) -> Self {
        assert_eq!(message.len(), params.message_len);
        let spec = params.spec();
        let mut padded = message.to_vec();
        padded.resize(params.padded_len, false);
        let poly = rscode::pack_message(&padded, params.degree, spec)
            .expect("degree bound holds the padded message");
        let poly_bits = poly.to_bits();
        Self {
            params,
            field: Field::new(spec),
            poly,
            poly_bits,
            round: 1,
            next_x: (params.degree as u64 + 1) % params.q(),
            terminated: false,
            rng,
        }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Next evaluation point to send.
    pub fn next_x(&self) -> u64 {
        self.next_x
    }

    /// Round 0: the evaluations at `0..=d`, `log q` bits each.
    pub fn plaintext(&self) -> Vec<bool> {
        let k = self.params.field_bits;
        let mut out = Vec::with_capacity(self.params.plaintext_len());
        for x in 0..=self.params.degree as u64 {
            bits::push_le(&mut out, self.poly.evaluate(&self.field, x), k);
        }
        out
    }

    /// Slot 2: echo of a valid fingerprint of her polynomial, else zeros.
    pub fn answer_fingerprint(&mut self, heard: &[bool], rp: &RoundParams) -> Vec<bool> {
        let amd_len = rp.fingerprint_amd.encoded_len();
        let enc_len = blockcode::encoded_len(amd_len);
        let matched = blockcode::ec_dec(&heard[..enc_len], amd_len)
            .ok()
            .filter(|f| self.fingerprint_matches(f, rp));
        match matched {
            Some(f) => pad(blockcode::ec_enc(&f), rp.fingerprint_slot),
            None => vec![false; rp.fingerprint_slot],
        }
    }

    fn fingerprint_matches(&self, codeword: &[bool], rp: &RoundParams) -> bool {
        let Ok(parsed) = AmdCodeword::parse(codeword, rp.fingerprint_amd) else {
            return false;
        };
        if !parsed.verifies() {
            return false;
        }
        let Ok(claimed) = Fingerprint::from_bits(&parsed.payload, &rp.fingerprint) else {
            return false;
        };
        integrity::fingerprint_with(&rp.fingerprint, &claimed.seed, &self.poly_bits)
            .map(|own| own.digest == claimed.digest)
            .unwrap_or(false)
    }

    /// Slot 3 outcome: `None` on silence (she terminates), otherwise the
    /// slot-4 payload carrying the next two evaluations.
    pub fn answer_request(&mut self, heard: &[bool], rp: &RoundParams) -> Option<Vec<bool>> {
        self.round += 1;
        if channel::is_silent(heard) {
            self.terminated = true;
            return None;
        }
        let k = self.params.field_bits;
        let q = self.params.q();
        let mut payload = Vec::with_capacity(2 * k as usize);
        for i in 0..2 {
            let x = (self.next_x + i) % q;
            bits::push_le(&mut payload, self.poly.evaluate(&self.field, x), k);
        }
        self.next_x = (self.next_x + 2) % q;
        let amd = integrity::amd_enc(&payload, rp.eta, &mut self.rng).expect("eta is in (0, 1)");
        Some(pad(blockcode::ec_enc(&amd.to_bits()), rp.evaluation_slot))
    }
}

/// Receiver side.
#[derive(Debug, Clone)]
pub struct Bob {
    params: ProtocolParams,
    field: Field,
    tuples: TupleMultiset,
    estimate: Option<Polynomial>,
    sent_codeword: Option<Vec<bool>>,
    round: u64,
    next_x: u64,
    awaiting: bool,
    terminated: bool,
    decoded: Option<Vec<bool>>,
    rng: ChaCha8Rng,
}

impl Bob {
    pub fn new(params: ProtocolParams, rng: ChaCha8Rng) -> Self {
        Self {
            params,
            field: Field::new(params.spec()),
            tuples: TupleMultiset::new(),
            estimate: None,
            sent_codeword: None,
            round: 1,
            next_x: (params.degree as u64 + 1) % params.q(),
            awaiting: false,
            terminated: false,
            decoded: None,
            rng,
        }
    }

    pub fn tuples(&self) -> &TupleMultiset {
        &self.tuples
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// True after a resend request, until the evaluations are ingested.
    pub fn is_awaiting_evaluations(&self) -> bool {
        self.awaiting
    }

    pub fn decoded(&self) -> Option<&[bool]> {
        self.decoded.as_deref()
    }

    pub fn ingest_plaintext(&mut self, heard: &[bool]) {
        let k = self.params.field_bits;
        for (x, y) in bits::chunks_le(heard, k).into_iter().enumerate() {
            self.tuples.insert(EvaluationTuple::new(x as u64, y));
        }
        self.estimate = None;
    }

    /// `getPolynomial(maj(B))`, cached until `B` changes.
    pub fn estimate(&mut self) -> &Polynomial {
        if self.estimate.is_none() {
            let points = rscode::majority_filter(&self.tuples);
            let p = rscode::get_polynomial(&self.field, &points, self.params.degree)
                .expect("B covers at least d + 1 distinct points");
            self.estimate = Some(p);
        }
        self.estimate.as_ref().expect("just computed")
    }

    /// Slot 1: encoded fingerprint of the current estimate under a fresh seed.
    pub fn fingerprint_message(&mut self, rp: &RoundParams) -> Vec<bool> {
        let poly_bits = self.estimate().to_bits();
        let seed = rp.fingerprint.sample_seed(&mut self.rng);
        let fp = integrity::fingerprint_with(&rp.fingerprint, &seed, &poly_bits)
            .expect("estimate has the canonical length");
        let amd = integrity::amd_enc(&fp.to_bits(), rp.eta, &mut self.rng)
            .expect("eta is in (0, 1)")
            .to_bits();
        let out = pad(blockcode::ec_enc(&amd), rp.fingerprint_slot);
        self.sent_codeword = Some(amd);
        out
    }

    /// Slot 3: `None` if the echo matches (he terminates and outputs his
    /// estimate), otherwise `b_j` random bits.
    pub fn check_echo(&mut self, heard: &[bool], rp: &RoundParams) -> Option<Vec<bool>> {
        let amd_len = rp.fingerprint_amd.encoded_len();
        let enc_len = blockcode::encoded_len(amd_len);
        let echoed = blockcode::ec_dec(&heard[..enc_len], amd_len).ok();
        let own = self.sent_codeword.take();
        self.round += 1;
        if echoed.is_some() && echoed == own {
            let len = self.params.padded_len;
            let padded = rscode::unpack_message(self.estimate(), len)
                .expect("estimate holds the padded length");
            self.decoded = Some(padded[..self.params.message_len].to_vec());
            self.terminated = true;
            return None;
        }
        self.awaiting = true;
        Some((0..rp.b).map(|_| self.rng.random::<bool>()).collect())
    }

    /// Slot 4: adds the two received evaluations to `B`, verified or not.
    pub fn ingest_evaluations(&mut self, heard: &[bool], rp: &RoundParams) {
        let amd_len = rp.evaluation_amd.encoded_len();
        let enc_len = blockcode::encoded_len(amd_len);
        let decoded = blockcode::ec_dec(&heard[..enc_len], amd_len).expect("framed by the slot");
        let parsed = AmdCodeword::parse(&decoded, rp.evaluation_amd).expect("framed by the slot");
        let k = self.params.field_bits;
        let q = self.params.q();
        for (i, y) in bits::chunks_le(&parsed.payload, k).into_iter().enumerate() {
            let x = (self.next_x + i as u64) % q;
            self.tuples.insert(EvaluationTuple::new(x, y));
        }
        self.next_x = (self.next_x + 2) % q;
        self.awaiting = false;
        self.estimate = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    /// Bob output `M` and both parties terminated.
    Success,
    /// Bob terminated with a different message.
    WrongMessage,
    /// Alice terminated while Bob was still waiting.
    AliceTerminatedFirst,
    /// Bob learned a wrong length in the header phase.
    WrongLength,
    /// The round guard fired; not a protocol failure.
    Aborted,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::WrongMessage => "wrong-message",
            Outcome::AliceTerminatedFirst => "alice-terminated-first",
            Outcome::WrongLength => "wrong-length",
            Outcome::Aborted => "aborted",
        }
    }
}

/// Per-run seeds, all derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunSeeds {
    pub master: u64,
    pub alice: u64,
    pub bob: u64,
    pub adversary: u64,
}

impl RunSeeds {
    pub fn from_master(master: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        Self {
            master,
            alice: rng.next_u64(),
            bob: rng.next_u64(),
            adversary: rng.next_u64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Round guard; `None` means `64 d`.
    pub max_rounds: Option<u64>,
    pub visibility: Visibility,
    pub record_transcript: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_rounds: None,
            visibility: Visibility::Oblivious,
            record_transcript: false,
        }
    }
}

/// A round at whose end Bob's estimate was wrong with fewer than `r / 4`
/// bad tuples in `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BadTupleViolation {
    pub stage: Stage,
    pub round: u64,
    pub bad_tuples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub outcome: Outcome,
    pub message_len: usize,
    pub delta: f64,
    /// `T`.
    pub flips: u64,
    pub sent_alice: u64,
    pub sent_bob: u64,
    /// Rounds after round 0, summed over stages.
    pub rounds: u64,
    /// Evaluation tuples Alice sent, round 0 included.
    pub tuples_sent: u64,
    pub sent_per_phase: BTreeMap<String, u64>,
    pub flips_per_phase: BTreeMap<String, u64>,
    pub seeds: RunSeeds,
    /// Length decoded from the header, for unknown-length runs.
    pub learned_len: Option<u64>,
    /// Rounds checked for the bad-tuple bound.
    pub bad_tuple_checks: u64,
    pub bad_tuple_violations: Vec<BadTupleViolation>,
    /// Bob's output of the last stage that reached termination.
    pub decoded: Option<Vec<bool>>,
    pub transcript: Option<Vec<ChannelStep>>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    pub fn total_sent(&self) -> u64 {
        self.sent_alice + self.sent_bob
    }

    /// Flat `key=value` lines with stable names.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            writeln!(out, "{k}={v}").expect("writing to a String");
        };
        kv("success", self.success().to_string());
        kv("outcome", self.outcome.as_str().into());
        kv("L", self.message_len.to_string());
        kv("delta", self.delta.to_string());
        kv("T", self.flips.to_string());
        kv("totalSent", self.total_sent().to_string());
        kv("totalSentAlice", self.sent_alice.to_string());
        kv("totalSentBob", self.sent_bob.to_string());
        kv("rounds", self.rounds.to_string());
        kv("tuplesSent", self.tuples_sent.to_string());
        if let Some(l) = self.learned_len {
            kv("learnedL", l.to_string());
        }
        for (phase, n) in &self.sent_per_phase {
            kv(&format!("sent.{phase}"), n.to_string());
        }
        for (phase, n) in &self.flips_per_phase {
            kv(&format!("flips.{phase}"), n.to_string());
        }
        kv("seed.master", self.seeds.master.to_string());
        kv("seed.alice", self.seeds.alice.to_string());
        kv("seed.bob", self.seeds.bob.to_string());
        kv("seed.adversary", self.seeds.adversary.to_string());
        kv(
            "badTupleViolations",
            self.bad_tuple_violations.len().to_string(),
        );
        out
    }
}

struct StageResult {
    outcome: Outcome,
    rounds: u64,
    tuples_sent: u64,
    decoded: Option<Vec<bool>>,
}

/// Runs one known-length pass over `channel`.
#[allow(clippy::too_many_arguments)]
fn run_stage(
    channel: &mut Channel<'_>,
    params: ProtocolParams,
    message: &[bool],
    stage: Stage,
    alice: &mut Alice,
    bob: &mut Bob,
    max_rounds: u64,
    violations: &mut Vec<BadTupleViolation>,
    checks: &mut u64,
) -> Result<StageResult, ProtocolError> {
    channel.set_params(params.public());
    let slot = |round: u64, phase: Phase, len: usize| SlotMeta {
        stage,
        round,
        phase,
        len,
    };
    let truth = alice.polynomial().clone();
    let check_bad_tuples = params.message_len() >= 3;
    let field = Field::new(params.spec());

    let plain = alice.plaintext();
    let heard = channel.listen(
        Some((Party::Alice, &plain)),
        slot(0, Phase::Plaintext, plain.len()),
    )?;
    bob.ingest_plaintext(&heard);
    let mut tuples_sent = params.degree() as u64 + 1;

    let mut rounds = 0;
    let outcome = loop {
        if rounds == max_rounds {
            break Outcome::Aborted;
        }
        rounds += 1;
        let j = rounds;
        let rp = params.round(j);
        let bob_active = !bob.is_terminated();

        let tx = bob_active.then(|| bob.fingerprint_message(&rp));
        let heard = channel.listen(
            tx.as_deref().map(|b| (Party::Bob, b)),
            slot(j, Phase::Fingerprint, rp.fingerprint_slot),
        )?;

        let tx = (!alice.is_terminated()).then(|| alice.answer_fingerprint(&heard, &rp));
        let heard = channel.listen(
            tx.as_deref().map(|b| (Party::Alice, b)),
            slot(j, Phase::Echo, rp.fingerprint_slot),
        )?;

        let tx = if bob_active {
            bob.check_echo(&heard, &rp)
        } else {
            None
        };
        let heard = channel.listen(
            tx.as_deref().map(|b| (Party::Bob, b)),
            slot(j, Phase::ResendRequest, rp.b),
        )?;

        let tx = if alice.is_terminated() {
            None
        } else {
            alice.answer_request(&heard, &rp)
        };
        if tx.is_some() || bob.is_awaiting_evaluations() {
            if tx.is_some() {
                tuples_sent += 2;
            }
            let heard = channel.listen(
                tx.as_deref().map(|b| (Party::Alice, b)),
                slot(j, Phase::EvaluationResend, rp.evaluation_slot),
            )?;
            if bob.is_awaiting_evaluations() {
                bob.ingest_evaluations(&heard, &rp);
            }
        }

        if bob_active && check_bad_tuples {
            *checks += 1;
            if *bob.estimate() != truth {
                let bad = bob.tuples().count_disagreeing(&field, &truth);
                if (4 * bad as u64) < j {
                    violations.push(BadTupleViolation {
                        stage,
                        round: j,
                        bad_tuples: bad,
                    });
                }
            }
        }

        match (alice.is_terminated(), bob.is_terminated()) {
            (true, true) => {
                let decoded = bob.decoded().expect("terminated Bob has output");
                break if decoded == message {
                    Outcome::Success
                } else {
                    Outcome::WrongMessage
                };
            }
            (true, false) => break Outcome::AliceTerminatedFirst,
            _ => {}
        }
    };
    Ok(StageResult {
        outcome,
        rounds,
        tuples_sent,
        decoded: bob.decoded().map(<[bool]>::to_vec),
    })
}

fn party_rngs(seeds: &RunSeeds) -> (ChaCha8Rng, ChaCha8Rng) {
    (
        ChaCha8Rng::seed_from_u64(seeds.alice),
        ChaCha8Rng::seed_from_u64(seeds.bob),
    )
}

fn finish(
    channel: &mut Channel<'_>,
    message: &[bool],
    delta: f64,
    seeds: RunSeeds,
    outcome: Outcome,
    rounds: u64,
    tuples_sent: u64,
) -> RunReport {
    let ledger = channel.ledger();
    RunReport {
        outcome,
        message_len: message.len(),
        delta,
        flips: ledger.total(),
        sent_alice: channel.bits_sent(Party::Alice),
        sent_bob: channel.bits_sent(Party::Bob),
        rounds,
        tuples_sent,
        sent_per_phase: channel
            .bits_sent_per_phase()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        flips_per_phase: ledger
            .per_phase()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        seeds,
        learned_len: None,
        bad_tuple_checks: 0,
        bad_tuple_violations: Vec::new(),
        decoded: None,
        transcript: channel.take_transcript(),
    }
}

fn open_channel<'a>(
    adversary: &'a mut dyn Adversary,
    params: &ProtocolParams,
    message: &[bool],
    options: &RunOptions,
) -> Channel<'a> {
    let ch = Channel::new(adversary, params.public(), message).with_visibility(options.visibility);
    if options.record_transcript {
        ch.recording()
    } else {
        ch
    }
}

/// Simulates one run with `L = |message|` known to both parties.
pub fn run_known_l(
    message: &[bool],
    delta: f64,
    adversary: &mut dyn Adversary,
    seeds: RunSeeds,
    options: RunOptions,
) -> Result<RunReport, ProtocolError> {
    let params = ProtocolParams::derive(message.len(), delta)?;
    let (alice_rng, bob_rng) = party_rngs(&seeds);
    let mut alice = Alice::new(params, message, alice_rng);
    let mut bob = Bob::new(params, bob_rng);
    let mut channel = open_channel(adversary, &params, message, &options);
    let mut violations = Vec::new();
    let mut checks = 0;
    let max_rounds = options.max_rounds.unwrap_or(64 * params.degree() as u64);
    let res = run_stage(
        &mut channel,
        params,
        message,
        Stage::Known,
        &mut alice,
        &mut bob,
        max_rounds,
        &mut violations,
        &mut checks,
    )?;
    let mut report = finish(
        &mut channel,
        message,
        delta,
        seeds,
        res.outcome,
        res.rounds,
        res.tuples_sent,
    );
    report.decoded = res.decoded;
    report.bad_tuple_checks = checks;
    report.bad_tuple_violations = violations;
    Ok(report)
}

/// 64-bit big-endian encoding of `len`.
pub fn length_header(len: u64) -> Vec<bool> {
    let mut out = Vec::with_capacity(HEADER_BITS);
    bits::push_be(&mut out, len, HEADER_BITS as u32);
    out
}

/// Two-phase run for a receiver that does not know `L`: a fixed-width
/// length header at `delta / 2`, then the message at `delta / 2`.
pub fn run_unknown_l(
    message: &[bool],
    delta: f64,
    adversary: &mut dyn Adversary,
    seeds: RunSeeds,
    options: RunOptions,
) -> Result<RunReport, ProtocolError> {
    if message.is_empty() {
        return Err(ProtocolError::Length(0));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ProtocolError::Delta(delta));
    }
    let half = delta / 2.0;
    let header = length_header(message.len() as u64);
    let header_params = ProtocolParams::derive(HEADER_BITS, half)?;
    let message_params = ProtocolParams::derive(message.len(), half)?;
    let (mut alice_rng, mut bob_rng) = party_rngs(&seeds);
    let mut channel = open_channel(adversary, &header_params, message, &options);
    let mut violations = Vec::new();
    let mut checks = 0;

    let mut alice = Alice::new(header_params, &header, alice_rng.clone());
    let mut bob = Bob::new(header_params, bob_rng.clone());
    let max_rounds = options
        .max_rounds
        .unwrap_or(64 * header_params.degree() as u64);
    let first = run_stage(
        &mut channel,
        header_params,
        &header,
        Stage::Header,
        &mut alice,
        &mut bob,
        max_rounds,
        &mut violations,
        &mut checks,
    )?;
    let learned = first.decoded.as_deref().map(bits::read_be);
    let mut outcome = first.outcome;
    let mut rounds = first.rounds;
    let mut tuples_sent = first.tuples_sent;
    let mut decoded = None;

    if first.outcome == Outcome::WrongMessage {
        outcome = Outcome::WrongLength;
    } else if first.outcome == Outcome::Success {
        // Fresh party streams for the second phase, drawn from the first.
        alice_rng = ChaCha8Rng::seed_from_u64(alice_rng.next_u64() ^ seeds.alice);
        bob_rng = ChaCha8Rng::seed_from_u64(bob_rng.next_u64() ^ seeds.bob);
        let mut alice = Alice::new(message_params, message, alice_rng);
        let mut bob = Bob::new(message_params, bob_rng);
        let max_rounds = options
            .max_rounds
            .unwrap_or(64 * message_params.degree() as u64);
        let second = run_stage(
            &mut channel,
            message_params,
            message,
            Stage::Message,
            &mut alice,
            &mut bob,
            max_rounds,
            &mut violations,
            &mut checks,
        )?;
        outcome = second.outcome;
        rounds += second.rounds;
        tuples_sent += second.tuples_sent;
        decoded = second.decoded;
    }
    let mut report = finish(
        &mut channel,
        message,
        delta,
        seeds,
        outcome,
        rounds,
        tuples_sent,
    );
    report.learned_len = learned;
    report.decoded = decoded;
    report.bad_tuple_checks = checks;
    report.bad_tuple_violations = violations;
    Ok(report)
}

/// Exact cost of an undisturbed run: round 0 plus slots 1 and 2 of round 1.
pub fn noiseless_cost(params: &ProtocolParams) -> u64 {
    let rp = params.round(1);
    (params.plaintext_len() + 2 * rp.fingerprint_slot) as u64
}

/// Lower bound on the flips needed to make `m` evaluation tuples bad, with
/// the realized decoding radius in place of one third.
pub fn cost_lower_bound_f(m: u64, params: &ProtocolParams) -> f64 {
    let d = params.degree() as f64;
    let m_f = m as f64;
    if m_f <= d + 1.0 {
        return m_f;
    }
    let rho = CODE_PARAMS.radius();
    let c = params.constant() as f64;
    let lambda = params.log_term() as f64;
    (d + 1.0) + rho * c / 2.0 * ((m_f - d - 1.0) * lambda + (m_f - d - 3.0).powi(2) / (4.0 * d))
}

/// Upper bound on the bits needed to send `m` evaluation tuples.
pub fn cost_upper_bound_g(m: u64, params: &ProtocolParams) -> f64 {
    let d = params.degree() as f64;
    let m_f = m as f64;
    if m_f < d + 1.0 {
        return m_f * params.field_bits() as f64;
    }
    let c = params.constant() as f64;
    let lambda = params.log_term() as f64;
    params.message_len() as f64
        + 5.0 * c * ((m_f - d - 1.0) / 2.0 * lambda + (m_f - d + 1.0).powi(2) / (8.0 * d))
}

/// Bits a known-length run with `rounds` rounds may send beyond
/// [`cost_upper_bound_g`]: round-0 padding, the final round's fingerprint and
/// echo (which carry no tuples), and slots sized above `b_j`.
pub fn cost_upper_bound_slack(rounds: u64, params: &ProtocolParams) -> f64 {
    let mut slack = params.plaintext_len().saturating_sub(params.message_len()) as f64;
    for j in 1..=rounds {
        let rp = params.round(j);
        slack += 2.0 * (rp.fingerprint_slot - rp.b) as f64 + (rp.evaluation_slot - rp.b) as f64;
    }
    if rounds >= 1 {
        let last = params.round(rounds);
        slack += (2 * last.fingerprint_slot.max(last.evaluation_slot)) as f64
            + last.b as f64
            + last.evaluation_slot as f64;
    }
    slack
}

/// Constants of the headline bound
/// `L + c1 T + c2 min(T + 1, L / log L) ceil(log(L / delta)) + c3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadlineConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl HeadlineConstants {
    pub fn bound(&self, message_len: usize, flips: u64, delta: f64) -> f64 {
        message_len as f64
            + self.c1 * flips as f64
            + self.c2 * Self::round_term(message_len, flips, delta)
            + self.c3
    }

    /// `min(T + 1, L / log L) ceil(log(L / delta))`.
    pub fn round_term(message_len: usize, flips: u64, delta: f64) -> f64 {
        let l = message_len.max(2) as f64;
        let log_l = l.log2().ceil().max(1.0);
        let rounds = (flips as f64 + 1.0).min(l / log_l);
        rounds * ceil_log2(l / delta) as f64
    }
}
