use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_send::adversary::AdversarySpec;
use robust_send::channel::{Adversary, AdversaryView, FlipPlan, NullAdversary, Phase, Visibility};
use robust_send::protocol::{
    noiseless_cost, run_known_l, run_unknown_l, Alice, Bob, Outcome, ProtocolParams, RunOptions,
    RunSeeds,
};

fn random_message(len: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random()).collect()
}

fn run(
    spec: AdversarySpec,
    m: &[bool],
    delta: f64,
    master: u64,
) -> robust_send::protocol::RunReport {
    let seeds = RunSeeds::from_master(master);
    let mut adv = spec.build(seeds.adversary);
    run_known_l(m, delta, adv.as_mut(), seeds, RunOptions::default()).unwrap()
}

#[test]
fn noiseless_runs_always_succeed() {
    let p = ProtocolParams::derive(256, 0.01).unwrap();
    for seed in 0..1000 {
        let m = random_message(256, seed);
        let r = run(AdversarySpec::Null, &m, 0.01, seed);
        assert!(r.success());
        assert_eq!(r.decoded.as_deref(), Some(&m[..]));
        assert_eq!(r.total_sent(), noiseless_cost(&p));
        assert_eq!(r.rounds, 1);
    }
}

#[test]
fn tiny_messages() {
    for len in 1..=12 {
        for seed in 0..20 {
            let m = random_message(len, seed);
            let r = run(AdversarySpec::Null, &m, 0.2, seed);
            assert!(r.success(), "L={len}");
            assert_eq!(r.decoded.as_deref(), Some(&m[..]));
            let r = run(AdversarySpec::BudgetedRandom(20), &m, 0.2, seed);
            assert_ne!(r.outcome, Outcome::Aborted, "L={len}");
        }
    }
}

#[test]
fn both_sides_compute_the_same_schedule() {
    // Parties derive parameters independently from (L, delta).
    for (l, delta) in [(64, 0.1), (1000, 0.01), (4096, 0.001)] {
        let a = ProtocolParams::derive(l, delta).unwrap();
        let b = ProtocolParams::derive(l, delta).unwrap();
        for j in 1..=4 * a.degree() as u64 {
            assert_eq!(a.round(j), b.round(j));
        }
    }
}

#[test]
fn state_counters_follow_the_schedule() {
    let p = ProtocolParams::derive(64, 0.1).unwrap();
    let m = random_message(64, 1);
    let mut alice = Alice::new(p, &m, ChaCha8Rng::seed_from_u64(1));
    let mut bob = Bob::new(p, ChaCha8Rng::seed_from_u64(2));
    bob.ingest_plaintext(&alice.plaintext());
    let d = p.degree() as u64;
    for round in 1..=6u64 {
        assert_eq!(alice.next_x(), (d + 1 + 2 * (round - 1)) % p.q());
        assert_eq!(bob.tuples().len() as u64, d + 1 + 2 * (round - 1));
        let rp = p.round(round);
        let fp = bob.fingerprint_message(&rp);
        let _ = alice.answer_fingerprint(&fp, &rp);
        // A garbled echo forces a resend.
        let req = bob
            .check_echo(&vec![true; rp.fingerprint_slot], &rp)
            .unwrap();
        let payload = alice.answer_request(&req, &rp).unwrap();
        bob.ingest_evaluations(&payload, &rp);
    }
}

#[test]
fn finite_adversaries_terminate() {
    let m = random_message(1000, 4);
    for spec in AdversarySpec::bundled() {
        for seed in 0..10 {
            let r = run(spec, &m, 0.01, seed);
            assert_ne!(r.outcome, Outcome::Aborted, "{spec}");
            assert!(r.success(), "{spec} seed {seed}: {:?}", r.outcome);
            assert!(r.bad_tuple_violations.is_empty());
        }
    }
}

#[test]
fn budgeted_random_fails_rarely() {
    let m = random_message(1000, 8);
    let trials = 200;
    let fails = (0..trials)
        .filter(|&s| !run(AdversarySpec::BudgetedRandom(50), &m, 0.01, s).success())
        .count();
    let sigma = (0.01f64 * 0.99 / trials as f64).sqrt();
    assert!(fails as f64 / trials as f64 <= 0.01 + 3.0 * sigma);
}

#[test]
fn plaintext_corruption_is_repaired() {
    let m = random_message(1000, 9);
    let r = run(AdversarySpec::PlaintextCorruptor(10), &m, 0.01, 3);
    assert!(r.success());
    assert_eq!(r.flips, 10);
    // Unique decoding needs 2r + 1 > 2 * 10 extra points.
    assert_eq!(r.rounds, 11);
    assert_eq!(r.tuples_sent, 100 + 2 * 10);
    assert!(r.bad_tuple_checks >= 10);
}

/// Makes Alice hear silence in round 1 while Bob is still waiting.
struct Muffler;

impl Adversary for Muffler {
    fn name(&self) -> String {
        "muffler".into()
    }
    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
        match (view.slot.phase, view.slot.round) {
            // Corrupt the echo so Bob asks for more.
            (Phase::Echo, 1) => FlipPlan {
                toggles: vec![true; view.slot.len],
                free_bit: false,
            },
            _ => FlipPlan::none(),
        }
    }
}

#[test]
fn echo_jamming_costs_a_round() {
    let m = random_message(64, 2);
    let seeds = RunSeeds::from_master(5);
    let r = run_known_l(&m, 0.1, &mut Muffler, seeds, RunOptions::default()).unwrap();
    assert!(r.success());
    assert_eq!(r.rounds, 2);
}

/// Pays to flatten Bob's resend request so it reads as silence.
struct Silencer {
    budget_used: u64,
}

impl Adversary for Silencer {
    fn name(&self) -> String {
        "silencer".into()
    }
    fn plan(&mut self, view: &AdversaryView<'_>) -> FlipPlan {
        match view.slot.phase {
            Phase::Echo if view.slot.round == 1 => FlipPlan {
                toggles: vec![true; view.slot.len],
                free_bit: false,
            },
            Phase::ResendRequest if view.slot.round == 1 && view.observed.is_some() => {
                // Flip every bit that differs from zero.
                let toggles: Vec<bool> = view.observed.unwrap().to_vec();
                self.budget_used += toggles.iter().filter(|&&t| t).count() as u64;
                FlipPlan {
                    toggles,
                    free_bit: false,
                }
            }
            _ => FlipPlan::none(),
        }
    }
}

#[test]
fn spoofed_silence_is_reported_as_alice_leaving_first() {
    let m = random_message(64, 2);
    let seeds = RunSeeds::from_master(5);
    let opts = RunOptions {
        visibility: Visibility::Omniscient,
        ..RunOptions::default()
    };
    let mut adv = Silencer { budget_used: 0 };
    let r = run_known_l(&m, 0.1, &mut adv, seeds, opts).unwrap();
    assert_eq!(r.outcome, Outcome::AliceTerminatedFirst);
    assert!(!r.success());
}

#[test]
fn round_guard_aborts() {
    let m = random_message(256, 2);
    let seeds = RunSeeds::from_master(1);
    let mut adv = AdversarySpec::FingerprintJammer(100_000).build(seeds.adversary);
    let opts = RunOptions {
        max_rounds: Some(3),
        ..RunOptions::default()
    };
    let r = run_known_l(&m, 0.1, adv.as_mut(), seeds, opts).unwrap();
    assert_eq!(r.outcome, Outcome::Aborted);
    assert_eq!(r.rounds, 3);
}

#[test]
fn unknown_length_runs() {
    for (len, master) in [(1usize, 1u64), (7, 2), (256, 3), (1000, 4)] {
        let m = random_message(len, master);
        let seeds = RunSeeds::from_master(master);
        let r = run_unknown_l(&m, 0.1, &mut NullAdversary, seeds, RunOptions::default()).unwrap();
        assert!(r.success());
        assert_eq!(r.learned_len, Some(len as u64));
        assert_eq!(r.decoded.as_deref(), Some(&m[..]));
        for spec in AdversarySpec::bundled() {
            let mut adv = spec.build(seeds.adversary);
            let r = run_unknown_l(&m, 0.1, adv.as_mut(), seeds, RunOptions::default()).unwrap();
            assert!(r.success(), "{spec} L={len}: {:?}", r.outcome);
            assert_eq!(r.learned_len, Some(len as u64));
        }
    }
}

#[test]
fn per_phase_costs_add_up() {
    let m = random_message(1000, 5);
    let r = run(AdversarySpec::BudgetedRandom(50), &m, 0.1, 9);
    let sum: u64 = r.sent_per_phase.values().sum();
    assert_eq!(sum, r.total_sent());
    let flips: u64 = r.flips_per_phase.values().sum();
    assert_eq!(flips, r.flips);
    assert_eq!(r.sent_per_phase["plaintext"], 1000);
}
