//! Fingerprints and algebraic manipulation detection (AMD) codes.
//!
//! Fingerprints are polynomial-evaluation hashes over GF(2^w): the seed is a
//! random point `r`, the message is cut into `w`-bit chunks `m_1..m_n` and
//! followed by its bit length, and the digest is `sum m_i r^i`. Two distinct
//! messages of at most `l` bits collide for at most `ceil(l/w) + 1` values of
//! `r`. When one 64-bit component is not strong enough the hash is repeated
//! with independent seeds.
//!
//! The AMD code is `(m, x, x^(n+2) + sum m_i x^i)` over GF(2^w) with `x`
//! uniform and `n` odd; an additive tampering of a fixed offset is accepted
//! with probability at most `(n + 1) / 2^w`.

use rand::Rng;
use thiserror::Error;

use crate::bits;
use crate::field::FieldSpec;

const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrityError {
    #[error("message of {len} bits exceeds the {max}-bit fingerprint domain")]
    Length { len: usize, max: usize },
    #[error("seed has {got} bits, expected {expected}")]
    Seed { got: usize, expected: usize },
    #[error("probability {0} is outside (0, 1)")]
    Probability(f64),
    #[error("not a codeword")]
    NotACodeword,
    #[error("fingerprint encoding has {got} bits, expected {expected}")]
    Framing { got: usize, expected: usize },
}

fn check_probability(p: f64) -> Result<(), IntegrityError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(IntegrityError::Probability(p))
    }
}

/// Smallest `t >= 1` with `eps^t <= target`.
fn repetitions(eps: f64, target: f64) -> u32 {
    debug_assert!(eps > 0.0 && eps < 1.0);
    let mut t = (target.ln() / eps.ln()).ceil().max(1.0) as u32;
    // Guard the float rounding in both directions.
    while t > 1 && eps.powi(t as i32 - 1) <= target {
        t -= 1;
    }
    while eps.powi(t as i32) > target {
        t += 1;
    }
    t
}

/// Sizes of the fingerprint family for messages of at most `max_len` bits
/// with collision probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FingerprintParams {
    max_len: usize,
    width: u32,
    components: u32,
}

impl FingerprintParams {
    pub fn new(max_len: usize, p: f64) -> Result<Self, IntegrityError> {
        check_probability(p)?;
        let l = max_len.max(1) as f64;
        let width = ((l / p).log2().ceil() as u32 + 1).min(MAX_WIDTH);
        let chunks = max_len.max(1).div_ceil(width as usize) + 1;
        let eps = chunks as f64 / 2f64.powi(width as i32);
        let components = if eps <= p { 1 } else { repetitions(eps, p) };
        Ok(Self {
            max_len,
            width,
            components,
        })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Field degree of each hash component.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn components(&self) -> u32 {
        self.components
    }

    pub fn seed_len(&self) -> usize {
        (self.width * self.components) as usize
    }

    pub fn digest_len(&self) -> usize {
        (self.width * self.components) as usize
    }

    /// Length of a serialized `(seed, digest)` pair.
    pub fn encoded_len(&self) -> usize {
        self.seed_len() + self.digest_len()
    }

    /// Worst-case collision probability of two distinct messages.
    pub fn collision_bound(&self) -> f64 {
        let chunks = self.max_len.max(1).div_ceil(self.width as usize) + 1;
        (chunks as f64 / 2f64.powi(self.width as i32)).powi(self.components as i32)
    }

    fn spec(&self) -> FieldSpec {
        FieldSpec::new(self.width).expect("width is within 1..=64")
    }

    pub fn sample_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> FingerprintSeed {
        let mask = self.spec().mask();
        let mut out = Vec::with_capacity(self.seed_len());
        for _ in 0..self.components {
            bits::push_le(&mut out, rng.random::<u64>() & mask, self.width);
        }
        FingerprintSeed(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FingerprintSeed(pub Vec<bool>);

impl FingerprintSeed {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub seed: FingerprintSeed,
    pub digest: Vec<bool>,
}

impl Fingerprint {
    /// `seed || digest`.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = self.seed.0.clone();
        out.extend_from_slice(&self.digest);
        out
    }

    pub fn from_bits(bits: &[bool], params: &FingerprintParams) -> Result<Self, IntegrityError> {
        if bits.len() != params.encoded_len() {
            return Err(IntegrityError::Framing {
                got: bits.len(),
                expected: params.encoded_len(),
            });
        }
        let (seed, digest) = bits.split_at(params.seed_len());
        Ok(Self {
            seed: FingerprintSeed(seed.to_vec()),
            digest: digest.to_vec(),
        })
    }
}

/// Fingerprint of `message` under `seed` for the family sized by `(max_len, p)`.
pub fn fingerprint(
    seed: &FingerprintSeed,
    message: &[bool],
    p: f64,
    max_len: usize,
) -> Result<Fingerprint, IntegrityError> {
    let params = FingerprintParams::new(max_len, p)?;
    fingerprint_with(&params, seed, message)
}

pub fn fingerprint_with(
    params: &FingerprintParams,
    seed: &FingerprintSeed,
    message: &[bool],
) -> Result<Fingerprint, IntegrityError> {
    if message.len() > params.max_len {
        return Err(IntegrityError::Length {
            len: message.len(),
            max: params.max_len,
        });
    }
    if seed.0.len() != params.seed_len() {
        return Err(IntegrityError::Seed {
            got: seed.0.len(),
            expected: params.seed_len(),
        });
    }
    let spec = params.spec();
    let w = params.width;
    let mut chunks = bits::chunks_le(message, w);
    chunks.push(message.len() as u64 & spec.mask());
    let mut digest = Vec::with_capacity(params.digest_len());
    for r_bits in seed.0.chunks(w as usize) {
        let r = bits::read_le(r_bits);
        // Horner over m_1 r + m_2 r^2 + ... = r (m_1 + r (m_2 + ...)).
        let h = chunks
            .iter()
            .rev()
            .fold(0u64, |acc, &c| spec.mul_raw(acc ^ c, r));
        bits::push_le(&mut digest, h, w);
    }
    Ok(Fingerprint {
        seed: seed.clone(),
        digest,
    })
}

/// Geometry of an AMD codeword for a given payload length and strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmdParams {
    payload_len: usize,
    width: u32,
    components: u32,
}

impl AmdParams {
    pub fn new(payload_len: usize, eta: f64) -> Result<Self, IntegrityError> {
        check_probability(eta)?;
        for width in 1..=MAX_WIDTH {
            if amd_error_bound(payload_len, width) <= eta {
                return Ok(Self {
                    payload_len,
                    width,
                    components: 1,
                });
            }
        }
        let eps = amd_error_bound(payload_len, MAX_WIDTH);
        Ok(Self {
            payload_len,
            width: MAX_WIDTH,
            components: repetitions(eps, eta),
        })
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn components(&self) -> u32 {
        self.components
    }

    /// Tag bits appended to the payload.
    pub fn overhead(&self) -> usize {
        2 * (self.width * self.components) as usize
    }

    pub fn encoded_len(&self) -> usize {
        self.payload_len + self.overhead()
    }

    /// Acceptance probability of a fixed nonzero offset.
    pub fn error_bound(&self) -> f64 {
        amd_error_bound(self.payload_len, self.width).powi(self.components as i32)
    }

    fn chunk_count(&self) -> usize {
        odd_chunk_count(self.payload_len, self.width)
    }

    fn spec(&self) -> FieldSpec {
        FieldSpec::new(self.width).expect("width is within 1..=64")
    }

    fn check_value(&self, chunks: &[u64], x: u64) -> u64 {
        let spec = self.spec();
        let n = self.chunk_count();
        // sum_{i=1..n} m_i x^i by Horner, then + x^(n+2).
        let body = (0..n)
            .rev()
            .map(|i| chunks.get(i).copied().unwrap_or(0))
            .fold(0u64, |acc, c| spec.mul_raw(acc ^ c, x));
        body ^ spec.pow_raw(x, n as u64 + 2)
    }

    /// Recovers the geometry from the total codeword length.
    pub fn from_encoded_len(total: usize, eta: f64) -> Result<Self, IntegrityError> {
        check_probability(eta)?;
        (0..=total)
            .rev()
            .map(|len| Self::new(len, eta))
            .find(|p| matches!(p, Ok(p) if p.encoded_len() == total))
            .unwrap_or(Err(IntegrityError::NotACodeword))
    }
}

fn odd_chunk_count(payload_len: usize, width: u32) -> usize {
    let n = payload_len.div_ceil(width as usize).max(1);
    n | 1
}

fn amd_error_bound(payload_len: usize, width: u32) -> f64 {
    let n = odd_chunk_count(payload_len, width);
    (n + 1) as f64 / 2f64.powi(width as i32)
}

/// A parsed AMD codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmdCodeword {
    pub payload: Vec<bool>,
    /// `(x, f(x, payload))` per component.
    pub tags: Vec<(u64, u64)>,
    pub params: AmdParams,
}

impl AmdCodeword {
    /// `payload || x_1 || f_1 || x_2 || f_2 ...`, tags little-endian.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = self.payload.clone();
        for &(x, f) in &self.tags {
            bits::push_le(&mut out, x, self.params.width);
            bits::push_le(&mut out, f, self.params.width);
        }
        out
    }

    pub fn parse(encoded: &[bool], params: AmdParams) -> Result<Self, IntegrityError> {
        if encoded.len() != params.encoded_len() {
            return Err(IntegrityError::NotACodeword);
        }
        let (payload, tail) = encoded.split_at(params.payload_len);
        let w = params.width as usize;
        let tags = tail
            .chunks(2 * w)
            .map(|c| (bits::read_le(&c[..w]), bits::read_le(&c[w..])))
            .collect();
        Ok(Self {
            payload: payload.to_vec(),
            tags,
            params,
        })
    }

    pub fn verifies(&self) -> bool {
        let chunks = bits::chunks_le(&self.payload, self.params.width);
        self.tags
            .iter()
            .all(|&(x, f)| self.params.check_value(&chunks, x) == f)
    }
}

/// AMD-encodes `message` at strength `eta`, drawing the tag points from `rng`.
pub fn amd_enc<R: Rng + ?Sized>(
    message: &[bool],
    eta: f64,
    rng: &mut R,
) -> Result<AmdCodeword, IntegrityError> {
    let params = AmdParams::new(message.len(), eta)?;
    let chunks = bits::chunks_le(message, params.width);
    let mask = params.spec().mask();
    let tags = (0..params.components)
        .map(|_| {
            let x = rng.random::<u64>() & mask;
            (x, params.check_value(&chunks, x))
        })
        .collect();
    Ok(AmdCodeword {
        payload: message.to_vec(),
        tags,
        params,
    })
}

/// True iff `encoded` parses at strength `eta` and its tags verify.
pub fn is_codeword(encoded: &[bool], eta: f64) -> bool {
    AmdParams::from_encoded_len(encoded.len(), eta)
        .and_then(|p| AmdCodeword::parse(encoded, p))
        .map(|c| c.verifies())
        .unwrap_or(false)
}

/// Like [`is_codeword`] when the payload length is known.
pub fn is_codeword_with(encoded: &[bool], params: AmdParams) -> bool {
    AmdCodeword::parse(encoded, params)
        .map(|c| c.verifies())
        .unwrap_or(false)
}

/// Payload of a verified codeword.
pub fn amd_dec(encoded: &[bool], eta: f64) -> Result<Vec<bool>, IntegrityError> {
    let params = AmdParams::from_encoded_len(encoded.len(), eta)?;
    let c = AmdCodeword::parse(encoded, params)?;
    if !c.verifies() {
        return Err(IntegrityError::NotACodeword);
    }
    Ok(c.payload)
}
