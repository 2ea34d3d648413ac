use proptest::prelude::*;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_send::bits;
use robust_send::blockcode::{ec_dec, ec_enc, encoded_len, CODE_PARAMS, FRAMING_SLACK};

fn flip_positions(word: &mut [bool], positions: impl IntoIterator<Item = usize>) {
    for p in positions {
        word[p] = !word[p];
    }
}

/// All subsets of `0..n` with at most `w` elements.
fn patterns(n: usize, w: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..w {
        let mut next = Vec::new();
        for p in &frontier {
            let start = p.last().map_or(0, |&l: &usize| l + 1);
            for i in start..n {
                let mut q: Vec<usize> = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn every_pattern_within_radius_one_byte() {
    // One byte: 32-bit codewords with minimum distance 8.
    let n = encoded_len(8);
    assert_eq!(n, 32);
    let pats = patterns(n, 3);
    for len in [1, 5, 8] {
        for v in 0u64..(1 << len) {
            let m: Vec<bool> = (0..len).map(|i| (v >> i) & 1 == 1).collect();
            let c = ec_enc(&m);
            for p in &pats {
                let mut r = c.clone();
                flip_positions(&mut r, p.iter().copied());
                assert_eq!(ec_dec(&r, len).unwrap(), m, "len={len} v={v} flips={p:?}");
            }
        }
    }
}

#[test]
fn random_flips_below_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb10c);
    for _ in 0..10_000 {
        let len = rng.random_range(1..=127 * 8);
        let m: Vec<bool> = (0..len).map(|_| rng.random()).collect();
        let c = ec_enc(&m);
        let n = c.len();
        // Strictly fewer than rho * n flips.
        let max = (n as f64 * CODE_PARAMS.radius()).ceil() as usize - 1;
        let w = rng.random_range(0..=max);
        let mut r = c.clone();
        flip_positions(&mut r, index::sample(&mut rng, n, w));
        assert_eq!(ec_dec(&r, len).unwrap(), m);
    }
}

#[test]
fn expansion_is_bounded() {
    for len in 8..=4096 {
        let n = encoded_len(len);
        assert_eq!(n, 32 * len.div_ceil(8));
        assert!(n <= 4 * len + FRAMING_SLACK, "len={len}");
        assert_eq!(ec_enc(&vec![false; len]).len(), n);
    }
}

#[test]
fn rejects_wrong_framing() {
    assert!(ec_dec(&[false; 31], 8).is_err());
    assert!(ec_dec(&[false; 33], 8).is_err());
}

proptest! {
    #[test]
    fn encoding_is_linear(
        a in proptest::collection::vec(any::<bool>(), 1..400),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<bool> = (0..a.len()).map(|_| rng.random()).collect();
        prop_assert_eq!(ec_enc(&bits::xor(&a, &b)), bits::xor(&ec_enc(&a), &ec_enc(&b)));
    }

    #[test]
    fn roundtrip(m in proptest::collection::vec(any::<bool>(), 0..2000)) {
        prop_assert_eq!(ec_dec(&ec_enc(&m), m.len()).unwrap(), m);
    }
}
