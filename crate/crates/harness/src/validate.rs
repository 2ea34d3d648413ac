//! Monte Carlo check of the alternation bound for random strings.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest `b` for which the bound is claimed.
pub const MIN_BITS: usize = 71;

#[derive(Debug, Clone, PartialEq)]
pub struct AlternationResult {
    pub bits: usize,
    pub samples: u64,
    /// Samples with fewer than `bits / 3` alternations.
    pub silent: u64,
    /// `exp(-bits / 19)`.
    pub bound: f64,
}

impl AlternationResult {
    pub fn fraction(&self) -> f64 {
        self.silent as f64 / self.samples as f64
    }

    pub fn passed(&self) -> bool {
        self.fraction() <= self.bound
    }
}

/// Alternations of the `bits`-bit string packed little-endian in `words`.
pub fn packed_alternations(words: &[u64], bits: usize) -> u32 {
    let mut count = 0;
    for (i, &w) in words.iter().enumerate() {
        let valid = (bits - 64 * i).min(64);
        // Adjacent pairs inside the word: positions 0..valid-1.
        let pairs = valid - 1;
        let mask = if pairs == 64 {
            u64::MAX
        } else {
            (1u64 << pairs) - 1
        };
        count += ((w ^ (w >> 1)) & mask).count_ones();
        if let Some(&next) = words.get(i + 1) {
            count += ((w >> 63) ^ (next & 1)) as u32;
        }
    }
    count
}

/// Fraction of uniform `b`-bit strings that read as silence, per `b`.
pub fn validate_alternation_bound(
    bit_lengths: &[usize],
    samples: u64,
    seed: u64,
) -> Vec<AlternationResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    bit_lengths
        .iter()
        .map(|&bits| {
            assert!(bits >= 1);
            let n_words = bits.div_ceil(64);
            let tail = bits % 64;
            let mut words = vec![0u64; n_words];
            let mut silent = 0;
            for _ in 0..samples {
                for w in words.iter_mut() {
                    *w = rng.next_u64();
                }
                if tail != 0 {
                    words[n_words - 1] &= (1u64 << tail) - 1;
                }
                if 3 * (packed_alternations(&words, bits) as usize) < bits {
                    silent += 1;
                }
            }
            AlternationResult {
                bits,
                samples,
                silent,
                bound: (-(bits as f64) / 19.0).exp(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use robust_send::channel::{alternations, is_silent};

    fn unpack(words: &[u64], bits: usize) -> Vec<bool> {
        (0..bits)
            .map(|i| (words[i / 64] >> (i % 64)) & 1 == 1)
            .collect()
    }

    #[test]
    fn counter_matches_enumeration_at_ten_bits() {
        let mut silent = 0;
        for v in 0u64..1024 {
            let s = unpack(&[v], 10);
            assert_eq!(packed_alternations(&[v], 10) as usize, alternations(&s));
            silent += is_silent(&s) as u32;
        }
        assert_eq!(silent, 260);
    }

    #[test]
    fn counter_matches_across_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for bits in [63usize, 64, 65, 71, 128, 150, 200] {
            for _ in 0..200 {
                let mut words: Vec<u64> = (0..bits.div_ceil(64)).map(|_| rng.next_u64()).collect();
                if bits % 64 != 0 {
                    *words.last_mut().unwrap() &= (1u64 << (bits % 64)) - 1;
                }
                let s = unpack(&words, bits);
                assert_eq!(packed_alternations(&words, bits) as usize, alternations(&s));
            }
        }
    }

    #[test]
    fn small_run_respects_bound() {
        let r = validate_alternation_bound(&[MIN_BITS], 20_000, 1);
        assert!(r[0].passed(), "{r:?}");
        assert!((r[0].bound - 0.0237).abs() < 1e-3);
    }
}
