//! Binary linear block code: Reed–Solomon over GF(2^8) concatenated with the
//! extended Hamming [8,4,4] code.
//!
//! The message is cut into bytes, grouped into outer blocks of at most 127
//! bytes, and each block of `k` bytes is the coefficient vector of a
//! polynomial evaluated at `x = 0..2k-1`. Every evaluation byte is sent as
//! two Hamming words (low nibble first), 16 bits per outer symbol.
//!
//! Per block the code has relative distance above 1/8. Decoding is
//! generalized minimum distance: inner words are decoded to the nearest
//! codeword, outer symbols are erased in order of decreasing inner distance,
//! and the closest re-encoded candidate wins. Any pattern of fewer than
//! `(k + 1) * 2` flips in a `32k`-bit block, i.e. fewer than 1/16 of its bits,
//! is corrected.

use std::sync::OnceLock;

use thiserror::Error;

use crate::bits;
use crate::field::Field;
use crate::rscode::{self, EvaluationTuple};

/// Largest outer block, in message bytes (codeword length 2k <= 254 < 256).
pub const MAX_BLOCK_BYTES: usize = 127;

const SYMBOL_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockCodeError {
    #[error("codeword has {got} bits, a {message_len}-bit message encodes to {expected}")]
    Framing {
        got: usize,
        expected: usize,
        message_len: usize,
    },
}

/// Guarantees of the code, as rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    /// Output/input length ratio on byte-aligned inputs.
    pub expansion: (u32, u32),
    /// Fraction of flipped bits per block that is always corrected (exclusive).
    pub correct_radius: (u32, u32),
}

impl CodeParams {
    pub fn expansion(&self) -> f64 {
        self.expansion.0 as f64 / self.expansion.1 as f64
    }

    pub fn radius(&self) -> f64 {
        self.correct_radius.0 as f64 / self.correct_radius.1 as f64
    }
}

pub const CODE_PARAMS: CodeParams = CodeParams {
    expansion: (4, 1),
    correct_radius: (1, 16),
};

/// Extra bits beyond `expansion * |m|` caused by byte alignment.
pub const FRAMING_SLACK: usize = 28;

fn hamming_encode(nibble: u8) -> u8 {
    let d = |i: u8| (nibble >> i) & 1;
    let p0 = d(0) ^ d(1) ^ d(3);
    let p1 = d(0) ^ d(2) ^ d(3);
    let p2 = d(1) ^ d(2) ^ d(3);
    let p3 = d(0) ^ d(1) ^ d(2) ^ d(3) ^ p0 ^ p1 ^ p2;
    (nibble & 0xf) | (p0 << 4) | (p1 << 5) | (p2 << 6) | (p3 << 7)
}

/// The concatenated code with its lookup tables.
#[derive(Debug)]
pub struct ConcatenatedCode {
    outer: Field,
    encode_table: [u8; 16],
    /// Nearest nibble and distance for every received byte; ties pick the
    /// least nibble.
    decode_table: [(u8, u8); 256],
}

impl ConcatenatedCode {
    fn build() -> Self {
        let mut encode_table = [0u8; 16];
        for (n, e) in encode_table.iter_mut().enumerate() {
            *e = hamming_encode(n as u8);
        }
        let mut decode_table = [(0u8, 0u8); 256];
        for (r, entry) in decode_table.iter_mut().enumerate() {
            *entry = (0..16u8)
                .map(|n| (n, (encode_table[n as usize] ^ r as u8).count_ones() as u8))
                .min_by_key(|&(n, dist)| (dist, n))
                .expect("sixteen codewords");
        }
        Self {
            outer: Field::with_degree(8).expect("GF(2^8)"),
            encode_table,
            decode_table,
        }
    }

    /// Shared instance.
    pub fn standard() -> &'static ConcatenatedCode {
        static CODE: OnceLock<ConcatenatedCode> = OnceLock::new();
        CODE.get_or_init(Self::build)
    }

    pub fn params(&self) -> CodeParams {
        CODE_PARAMS
    }

    /// Codeword length for a `message_len`-bit input.
    pub fn encoded_len(&self, message_len: usize) -> usize {
        2 * SYMBOL_BITS * message_len.div_ceil(8)
    }

    pub fn encode(&self, message: &[bool]) -> Vec<bool> {
        let bytes = bits::to_bytes(message);
        let mut out = Vec::with_capacity(self.encoded_len(message.len()));
        for block in split_blocks(&bytes) {
            for sym in self.outer_encode(block) {
                self.push_symbol(&mut out, sym);
            }
        }
        out
    }

    /// Decodes a codeword of a `message_len`-bit message. Beyond the
    /// guaranteed radius the result is the closest candidate found, which
    /// may be wrong.
    pub fn decode(
        &self,
        received: &[bool],
        message_len: usize,
    ) -> Result<Vec<bool>, BlockCodeError> {
        let expected = self.encoded_len(message_len);
        if received.len() != expected {
            return Err(BlockCodeError::Framing {
                got: received.len(),
                expected,
                message_len,
            });
        }
        let sizes = block_sizes(message_len.div_ceil(8));
        let mut bytes = Vec::with_capacity(message_len.div_ceil(8));
        let mut offset = 0;
        for k in sizes {
            let len = 2 * k * SYMBOL_BITS;
            bytes.extend(self.decode_block(&received[offset..offset + len], k));
            offset += len;
        }
        Ok(bits::from_bytes(&bytes, message_len))
    }

    fn outer_encode(&self, block: &[u8]) -> Vec<u8> {
        let coeffs: Vec<u64> = block.iter().map(|&b| b as u64).collect();
        (0..2 * block.len() as u64)
            .map(|x| {
                coeffs
                    .iter()
                    .rev()
                    .fold(0u64, |acc, &c| self.outer.mul(acc, x) ^ c) as u8
            })
            .collect()
    }

    fn push_symbol(&self, out: &mut Vec<bool>, sym: u8) {
        bits::push_le(out, self.encode_table[(sym & 0xf) as usize] as u64, 8);
        bits::push_le(out, self.encode_table[(sym >> 4) as usize] as u64, 8);
    }

    fn symbol_bits(&self, sym: u8) -> [u8; 2] {
        [
            self.encode_table[(sym & 0xf) as usize],
            self.encode_table[(sym >> 4) as usize],
        ]
    }

    fn decode_block(&self, received: &[bool], k: usize) -> Vec<u8> {
        let n = 2 * k;
        let raw: Vec<[u8; 2]> = received
            .chunks(SYMBOL_BITS)
            .map(|c| [bits::read_le(&c[..8]) as u8, bits::read_le(&c[8..]) as u8])
            .collect();
        // (symbol, inner distance) per position
        let inner: Vec<(u8, u32)> = raw
            .iter()
            .map(|[lo, hi]| {
                let (a, da) = self.decode_table[*lo as usize];
                let (b, db) = self.decode_table[*hi as usize];
                (a | (b << 4), (da + db) as u32)
            })
            .collect();
        let distance_to = |msg: &[u8]| -> u32 {
            self.outer_encode(msg)
                .iter()
                .zip(&raw)
                .map(|(&s, r)| {
                    let c = self.symbol_bits(s);
                    (c[0] ^ r[0]).count_ones() + (c[1] ^ r[1]).count_ones()
                })
                .sum()
        };
        // Half the designed distance: 4 bits per outer symbol, k + 1 symbols.
        let unique_radius = 2 * (k as u32 + 1);

        let points: Vec<EvaluationTuple> = inner
            .iter()
            .enumerate()
            .map(|(x, &(s, _))| EvaluationTuple::new(x as u64, s as u64))
            .collect();
        let to_bytes = |coeffs: &[u64]| coeffs.iter().map(|&c| c as u8).collect::<Vec<u8>>();

        if inner.iter().all(|&(_, dist)| dist == 0) {
            let base = rscode::interpolate(&self.outer, &points[..k]);
            let msg = to_bytes(&base);
            if distance_to(&msg) == 0 {
                return msg;
            }
        }

        // Least reliable first; stable on position.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(inner[i].1));
        // Any candidate inside the unique radius is the nearest codeword.
        let mut reliable: Vec<EvaluationTuple> =
            order[n - k..].iter().map(|&i| points[i]).collect();
        reliable.sort();
        let msg = to_bytes(&rscode::interpolate(&self.outer, &reliable));
        if distance_to(&msg) < unique_radius {
            return msg;
        }
        let mut best: Option<(u32, Vec<u8>)> = None;
        for erased in 0..=(n - k) {
            let mut kept: Vec<EvaluationTuple> =
                order[erased..].iter().map(|&i| points[i]).collect();
            kept.sort();
            let Some(p) = rscode::unique_decode(&self.outer, &kept, k - 1) else {
                continue;
            };
            let msg = to_bytes(p.coeffs());
            let dist = distance_to(&msg);
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((dist, msg));
            }
            if dist < unique_radius {
                break;
            }
        }
        match best {
            Some((_, msg)) => msg,
            None => {
                let p = rscode::get_polynomial(&self.outer, &points, k - 1)
                    .expect("n >= k distinct points");
                to_bytes(p.coeffs())
            }
        }
    }
}

/// Splits `total` bytes into the fewest blocks of at most
/// [`MAX_BLOCK_BYTES`], sizes differing by at most one.
fn block_sizes(total: usize) -> Vec<usize> {
    if total == 0 {
        return Vec::new();
    }
    let count = total.div_ceil(MAX_BLOCK_BYTES);
    let base = total / count;
    let extra = total % count;
    (0..count).map(|i| base + usize::from(i < extra)).collect()
}

fn split_blocks(bytes: &[u8]) -> Vec<&[u8]> {
    let mut out = Vec::new();
    let mut rest = bytes;
    for k in block_sizes(bytes.len()) {
        let (head, tail) = rest.split_at(k);
        out.push(head);
        rest = tail;
    }
    out
}

/// Encodes with the shared [`ConcatenatedCode`].
pub fn ec_enc(message: &[bool]) -> Vec<bool> {
    ConcatenatedCode::standard().encode(message)
}

/// Decodes with the shared [`ConcatenatedCode`].
pub fn ec_dec(received: &[bool], message_len: usize) -> Result<Vec<bool>, BlockCodeError> {
    ConcatenatedCode::standard().decode(received, message_len)
}

pub fn encoded_len(message_len: usize) -> usize {
    ConcatenatedCode::standard().encoded_len(message_len)
}
