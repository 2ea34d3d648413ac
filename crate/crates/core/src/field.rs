//! Arithmetic over GF(2^k), 1 <= k <= 64.
//!
//! Elements use the polynomial basis: bit `i` of the representation is the
//! coefficient of `x^i`. Addition is XOR. Every degree has a fixed default
//! modulus, the lexicographically least irreducible polynomial of that degree.

use std::fmt;

use thiserror::Error;

/// Low `k` bits of the least irreducible polynomial of degree `k` over GF(2),
/// indexed by `k - 1`. The `x^k` term is implicit.
const LEAST_IRREDUCIBLE: [u64; 64] = [
    0, 3, 3, 3, 5, 3, 3, 27, 3, 9, 5, 9, 27, 33, 3, 43, 9, 9, 39, 9, 5, 3, 33, 27, 9, 27, 39, 3, 5,
    3, 9, 141, 75, 27, 5, 53, 63, 99, 17, 57, 9, 39, 89, 33, 27, 3, 33, 45, 113, 29, 75, 9, 71,
    125, 71, 149, 17, 99, 123, 3, 39, 105, 3, 27,
];

/// Largest degree for which [`Field`] builds log/antilog tables.
const TABLE_MAX_DEGREE: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field degree {0} is outside 1..=64")]
    UnsupportedDegree(u32),
    #[error("modulus of degree {0} is reducible")]
    Reducible(u32),
    #[error("operands belong to different fields ({left} vs {right})")]
    SpecMismatch { left: FieldSpec, right: FieldSpec },
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value:#x} does not fit in GF(2^{degree})")]
    OutOfRange { value: u64, degree: u32 },
}

/// Degree and modulus of a binary extension field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    degree: u32,
    /// Modulus without its leading `x^degree` term.
    modulus: u64,
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.degree, self.modulus)
    }
}

impl FieldSpec {
    /// GF(2^k) with the default (least irreducible) modulus.
    pub fn new(degree: u32) -> Result<Self, FieldError> {
        if !(1..=64).contains(&degree) {
            return Err(FieldError::UnsupportedDegree(degree));
        }
        Ok(Self {
            degree,
            modulus: LEAST_IRREDUCIBLE[degree as usize - 1],
        })
    }

    /// GF(2^k) with a caller-chosen modulus, given without its leading term.
    pub fn with_modulus(degree: u32, modulus: u64) -> Result<Self, FieldError> {
        if !(1..=64).contains(&degree) {
            return Err(FieldError::UnsupportedDegree(degree));
        }
        if degree < 64 && modulus >> degree != 0 {
            return Err(FieldError::OutOfRange {
                value: modulus,
                degree,
            });
        }
        let full = (1u128 << degree) | modulus as u128;
        if !is_irreducible(full) {
            return Err(FieldError::Reducible(degree));
        }
        Ok(Self { degree, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The modulus including its leading term.
    pub fn modulus(&self) -> u128 {
        (1u128 << self.degree) | self.modulus as u128
    }

    /// Number of field elements, `2^k`.
    pub fn order(&self) -> u128 {
        1u128 << self.degree
    }

    pub fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn contains(&self, value: u64) -> bool {
        value & !self.mask() == 0
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::OutOfRange {
                value,
                degree: self.degree,
            });
        }
        Ok(FieldElement { spec: *self, value })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            spec: *self,
            value: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            spec: *self,
            value: 1,
        }
    }

    /// Shift-and-reduce multiplication of two canonical values.
    pub fn mul_raw(&self, a: u64, mut b: u64) -> u64 {
        let top = 1u64 << (self.degree - 1);
        let mask = self.mask();
        let mut acc = 0u64;
        let mut a = a;
        // Walk b from its low bit, doubling a modulo the modulus each step.
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            let carry = a & top != 0;
            a = (a << 1) & mask;
            if carry {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow_raw(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp != 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat: `a^(2^k - 2)`.
    pub fn inv_raw(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let exp = if self.degree == 64 {
            u64::MAX - 1
        } else {
            (1u64 << self.degree) - 2
        };
        Some(self.pow_raw(a, exp))
    }
}

/// A value of GF(2^k) tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    value: u64,
}

impl FieldElement {
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::SpecMismatch {
                left: self.spec,
                right: other.spec,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(FieldElement {
            spec: self.spec,
            value: self.value ^ other.value,
        })
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(FieldElement {
            spec: self.spec,
            value: self.spec.mul_raw(self.value, other.value),
        })
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        let value = self
            .spec
            .inv_raw(self.value)
            .ok_or(FieldError::DivisionByZero)?;
        Ok(FieldElement {
            spec: self.spec,
            value,
        })
    }

    pub fn pow(&self, exp: u64) -> FieldElement {
        FieldElement {
            spec: self.spec,
            value: self.spec.pow_raw(self.value, exp),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

/// Arithmetic context over raw `u64` values of one field.
///
/// Small fields (k <= 16) multiply through log/antilog tables; larger ones
/// fall back to [`FieldSpec::mul_raw`]. All values passed in must already be
/// canonical for the field.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    tables: Option<Tables>,
}

#[derive(Debug, Clone)]
struct Tables {
    log: Vec<u32>,
    /// exp[i] = g^i for i in 0..2(q-1), so log sums never need reducing.
    exp: Vec<u64>,
}

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let tables = (spec.degree <= TABLE_MAX_DEGREE).then(|| build_tables(&spec));
        Self { spec, tables }
    }

    pub fn with_degree(degree: u32) -> Result<Self, FieldError> {
        Ok(Self::new(FieldSpec::new(degree)?))
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn degree(&self) -> u32 {
        self.spec.degree
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match &self.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
                }
            }
            None => self.spec.mul_raw(a, b),
        }
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        match &self.tables {
            Some(t) => {
                let order = (t.exp.len() / 2) as u32;
                let l = t.log[a as usize];
                Some(t.exp[((order - l) % order) as usize])
            }
            None => self.spec.inv_raw(a),
        }
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64, FieldError> {
        let inv = self.inv(b).ok_or(FieldError::DivisionByZero)?;
        Ok(self.mul(a, inv))
    }

    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        match &self.tables {
            Some(t) if base != 0 => {
                let order = (t.exp.len() / 2) as u64;
                let l = (t.log[base as usize] as u64 * (exp % order)) % order;
                t.exp[l as usize]
            }
            Some(_) => {
                if exp == 0 {
                    1
                } else {
                    0
                }
            }
            None => self.spec.pow_raw(base, exp),
        }
    }
}

fn build_tables(spec: &FieldSpec) -> Tables {
    let q = 1usize << spec.degree;
    let order = (q - 1) as u64;
    let generator = (2..q as u64)
        .chain(std::iter::once(1))
        .find(|&g| is_generator(spec, g, order))
        .expect("multiplicative group is cyclic");
    let mut log = vec![0u32; q];
    let mut exp = vec![0u64; 2 * (q - 1)];
    let mut x = 1u64;
    for i in 0..(q - 1) {
        exp[i] = x;
        exp[i + q - 1] = x;
        log[x as usize] = i as u32;
        x = spec.mul_raw(x, generator);
    }
    Tables { log, exp }
}

fn is_generator(spec: &FieldSpec, g: u64, order: u64) -> bool {
    if order == 1 {
        return g == 1;
    }
    prime_factors(order)
        .into_iter()
        .all(|p| spec.pow_raw(g, order / p) != 1)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// GF(2)[x] helpers on u128, used for the irreducibility test.

fn poly_degree(a: u128) -> i32 {
    127 - a.leading_zeros() as i32
}

fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = poly_degree(m);
    while poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

fn poly_mulmod(a: u128, b: u128, m: u128) -> u128 {
    let mut acc = 0u128;
    let mut a = poly_mod(a, m);
    let mut b = b;
    let dm = poly_degree(m);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if poly_degree(a) >= dm {
            a ^= m;
        }
    }
    acc
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Rabin's test: `f` of degree k is irreducible iff `x^(2^k) = x mod f` and
/// `gcd(x^(2^(k/p)) - x, f) = 1` for every prime `p | k`.
pub fn is_irreducible(f: u128) -> bool {
    let k = poly_degree(f);
    if k < 1 {
        return false;
    }
    let x = poly_mod(2, f);
    let frob = |e: i32| {
        let mut y = x;
        for _ in 0..e {
            y = poly_mulmod(y, y, f);
        }
        y
    };
    if frob(k) != x {
        return false;
    }
    prime_factors(k as u64)
        .into_iter()
        .all(|p| poly_gcd(f, frob(k / p as i32) ^ x) == 1)
}
