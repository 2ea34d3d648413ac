//! Message polynomials, Reed–Solomon evaluation and reconstruction.
//!
//! A message of `L` bits becomes a degree-`d` polynomial over GF(2^k) by
//! cutting it into `k`-bit little-endian chunks, chunk `i` being the
//! coefficient of `x^i`. Reconstruction from possibly corrupted evaluations
//! goes through [`get_polynomial`], which prefers unique decoding and falls
//! back to a deterministic best effort outside the unique-decoding regime.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bits;
use crate::field::{Field, FieldElement, FieldError, FieldSpec};

/// Largest candidate count `q^(d+1)` for which the max-support search is
/// carried out exhaustively when unique decoding finds nothing.
const EXHAUSTIVE_SEARCH_LIMIT: u128 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("{needed} message bits do not fit in {available} coefficient bits")]
    Capacity { needed: usize, available: usize },
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("more than one point at x = {0:#x}")]
    DuplicatePoint(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A polynomial of degree at most `d`, stored as exactly `d + 1` coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    spec: FieldSpec,
    coeffs: Vec<u64>,
}

impl Polynomial {
    pub fn zero(spec: FieldSpec, degree_bound: usize) -> Self {
        Self {
            spec,
            coeffs: vec![0; degree_bound + 1],
        }
    }

    /// Builds from coefficients, lowest degree first.
    pub fn from_coeffs(spec: FieldSpec, coeffs: Vec<u64>) -> Result<Self, CodeError> {
        if coeffs.is_empty() {
            return Err(CodeError::InsufficientPoints { needed: 1, got: 0 });
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| !spec.contains(c)) {
            return Err(FieldError::OutOfRange {
                value: bad,
                degree: spec.degree(),
            }
            .into());
        }
        Ok(Self { spec, coeffs })
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    /// The bound `d`; the true degree may be lower.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coefficient(&self, i: usize) -> FieldElement {
        self.spec
            .element(self.coeffs[i])
            .expect("coefficients are canonical")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, field: &Field, x: u64) -> u64 {
        debug_assert_eq!(field.spec(), self.spec);
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field.mul(acc, x) ^ c)
    }

    /// Canonical serialization: coefficients in order, `k` bits each, little-endian.
    pub fn to_bits(&self) -> Vec<bool> {
        let k = self.spec.degree();
        let mut out = Vec::with_capacity(self.coeffs.len() * k as usize);
        for &c in &self.coeffs {
            bits::push_le(&mut out, c, k);
        }
        out
    }

    /// Lexicographic order on the coefficient vector, highest degree first.
    fn cmp_lex(&self, other: &Polynomial) -> std::cmp::Ordering {
        self.coeffs.iter().rev().cmp(other.coeffs.iter().rev())
    }
}

/// Evaluates a polynomial at a typed field element.
pub fn evaluate(p: &Polynomial, x: FieldElement) -> Result<FieldElement, CodeError> {
    if x.spec() != p.spec {
        return Err(FieldError::SpecMismatch {
            left: p.spec,
            right: x.spec(),
        }
        .into());
    }
    let field = Field::new(p.spec);
    Ok(p.spec.element(p.evaluate(&field, x.value()))?)
}

/// Packs `message` into the coefficients of a degree-`d` polynomial.
pub fn pack_message(message: &[bool], d: usize, spec: FieldSpec) -> Result<Polynomial, CodeError> {
    let k = spec.degree() as usize;
    let available = (d + 1) * k;
    if message.len() > available {
        return Err(CodeError::Capacity {
            needed: message.len(),
            available,
        });
    }
    let mut coeffs = bits::chunks_le(message, k as u32);
    coeffs.resize(d + 1, 0);
    Ok(Polynomial { spec, coeffs })
}

/// Inverse of [`pack_message`]: the first `len` bits of the coefficient stream.
pub fn unpack_message(p: &Polynomial, len: usize) -> Result<Vec<bool>, CodeError> {
    let mut out = p.to_bits();
    if out.len() < len {
        return Err(CodeError::Capacity {
            needed: len,
            available: out.len(),
        });
    }
    out.truncate(len);
    Ok(out)
}

/// A claimed evaluation `y = P(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvaluationTuple {
    pub x: u64,
    pub y: u64,
}

impl EvaluationTuple {
    pub fn new(x: u64, y: u64) -> Self {
        Self { x, y }
    }
}

/// Multiset of received evaluation tuples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TupleMultiset {
    counts: BTreeMap<EvaluationTuple, usize>,
    total: usize,
}

impl TupleMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, t: EvaluationTuple) {
        *self.counts.entry(t).or_insert(0) += 1;
        self.total += 1;
    }

    /// Total number of tuples, counting multiplicity.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn multiplicity(&self, t: &EvaluationTuple) -> usize {
        self.counts.get(t).copied().unwrap_or(0)
    }

    /// Distinct tuples with their multiplicities, ordered by `(x, y)`.
    pub fn iter(&self) -> impl Iterator<Item = (&EvaluationTuple, usize)> {
        self.counts.iter().map(|(t, &n)| (t, n))
    }

    /// Number of stored tuples (with multiplicity) not lying on `p`.
    pub fn count_disagreeing(&self, field: &Field, p: &Polynomial) -> usize {
        self.iter()
            .filter(|(t, _)| p.evaluate(field, t.x) != t.y)
            .map(|(_, n)| n)
            .sum()
    }
}

impl FromIterator<EvaluationTuple> for TupleMultiset {
    fn from_iter<I: IntoIterator<Item = EvaluationTuple>>(iter: I) -> Self {
        let mut m = TupleMultiset::new();
        for t in iter {
            m.insert(t);
        }
        m
    }
}

/// For every `x` present, the most frequent tuple at `x`; ties go to the least `y`.
/// Output is sorted by `x`.
pub fn majority_filter(multiset: &TupleMultiset) -> Vec<EvaluationTuple> {
    let mut out: Vec<(EvaluationTuple, usize)> = Vec::new();
    // Iteration is ordered by (x, y), so a strict `>` keeps the least y on ties.
    for (t, n) in multiset.iter() {
        match out.last_mut() {
            Some((best, count)) if best.x == t.x => {
                if n > *count {
                    *best = *t;
                    *count = n;
                }
            }
            _ => out.push((*t, n)),
        }
    }
    out.into_iter().map(|(t, _)| t).collect()
}

/// Lagrange interpolation through `points` (distinct `x`), returning exactly
/// `points.len()` coefficients.
pub fn interpolate(field: &Field, points: &[EvaluationTuple]) -> Vec<u64> {
    let n = points.len();
    // master = prod (X - x_i)
    let mut master = vec![0u64; n + 1];
    master[0] = 1;
    for (i, p) in points.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            master[j] = master[j - 1] ^ field.mul(master[j], p.x);
        }
        master[0] = field.mul(master[0], p.x);
    }
    let mut out = vec![0u64; n];
    let mut quotient = vec![0u64; n];
    for p in points {
        // quotient = master / (X - x_i) by synthetic division.
        let mut carry = 0u64;
        for j in (0..n).rev() {
            carry = master[j + 1] ^ field.mul(carry, p.x);
            quotient[j] = carry;
        }
        let denom = quotient
            .iter()
            .rev()
            .fold(0, |acc, &c| field.mul(acc, p.x) ^ c);
        let scale = field
            .div(p.y, denom)
            .expect("interpolation points have distinct x");
        for (o, &c) in out.iter_mut().zip(&quotient) {
            *o ^= field.mul(scale, c);
        }
    }
    out
}

/// The degree-`<= d` polynomial supported by the most points of `points`.
///
/// Exact whenever agreeing points outnumber the rest by more than `d`
/// (unique decoding), and also for tiny search spaces, where it enumerates
/// every candidate and breaks ties toward the lexicographically least
/// coefficient vector. Otherwise it returns the interpolant of the `d + 1`
/// points with the least `x`.
pub fn get_polynomial(
    field: &Field,
    points: &[EvaluationTuple],
    d: usize,
) -> Result<Polynomial, CodeError> {
    if points.len() < d + 1 {
        return Err(CodeError::InsufficientPoints {
            needed: d + 1,
            got: points.len(),
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0].x == w[1].x) {
        return Err(CodeError::DuplicatePoint(w[0].x));
    }
    let spec = field.spec();

    let base = Polynomial {
        spec,
        coeffs: interpolate(field, &sorted[..d + 1]),
    };
    if support(field, &base, &sorted) == sorted.len() {
        return Ok(base);
    }
    if let Some(p) = unique_decode(field, &sorted, d) {
        return Ok(p);
    }
    let candidates = spec.order().checked_pow(d as u32 + 1);
    if matches!(candidates, Some(c) if c <= EXHAUSTIVE_SEARCH_LIMIT) {
        return Ok(best_support_exhaustive(field, &sorted, d));
    }
    Ok(base)
}

fn support(field: &Field, p: &Polynomial, points: &[EvaluationTuple]) -> usize {
    points
        .iter()
        .filter(|t| p.evaluate(field, t.x) == t.y)
        .count()
}

/// Unique decoding by the extended Euclidean algorithm on the interpolant of
/// all points and `prod (X - x_i)`, in `O(n^2)` field operations. Same
/// contract and result as [`berlekamp_welch`].
pub fn unique_decode(field: &Field, points: &[EvaluationTuple], d: usize) -> Option<Polynomial> {
    let n = points.len();
    if n < d + 1 {
        return None;
    }
    let mut master = vec![0u64; n + 1];
    master[0] = 1;
    for (i, p) in points.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            master[j] = master[j - 1] ^ field.mul(master[j], p.x);
        }
        master[0] = field.mul(master[0], p.x);
    }
    // Invariant: r_i = u_i * master + v_i * interpolant.
    let (mut r0, mut r1) = (master, interpolate(field, points));
    let (mut v0, mut v1) = (vec![0u64], vec![1u64]);
    trim(&mut r1);
    while 2 * degree(&r1) > n + d {
        let (quot, rem) = poly_divmod(field, &r0, &r1);
        let mut v2 = poly_mul(field, &quot, &v1);
        if v2.len() < v0.len() {
            v2.resize(v0.len(), 0);
        }
        for (a, &b) in v2.iter_mut().zip(&v0) {
            *a ^= b;
        }
        let mut rem = rem;
        trim(&mut rem);
        trim(&mut v2);
        r0 = std::mem::replace(&mut r1, rem);
        v0 = std::mem::replace(&mut v1, v2);
    }
    let (quot, rem) = poly_divmod(field, &r1, &v1);
    if rem.iter().any(|&c| c != 0) || quot.iter().skip(d + 1).any(|&c| c != 0) {
        return None;
    }
    let mut coeffs = quot;
    coeffs.resize(d + 1, 0);
    let p = Polynomial {
        spec: field.spec(),
        coeffs,
    };
    let agree = support(field, &p, points);
    (2 * agree > n + d).then_some(p)
}

/// Degree of a coefficient vector; the zero polynomial counts as degree 0.
fn degree(p: &[u64]) -> usize {
    p.iter().rposition(|&c| c != 0).unwrap_or(0)
}

fn trim(p: &mut Vec<u64>) {
    p.truncate(degree(p) + 1);
    if p.is_empty() {
        p.push(0);
    }
}

fn poly_mul(field: &Field, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= field.mul(x, y);
        }
    }
    out
}

/// Unique decoding by solving `Q(x_i) = y_i E(x_i)` with `E` monic of degree
/// `e = (n - d - 1) / 2`. Returns a polynomial only if it provably has the
/// largest support (agreement `a` with `2a > n + d`).
pub fn berlekamp_welch(field: &Field, points: &[EvaluationTuple], d: usize) -> Option<Polynomial> {
    let n = points.len();
    if n < d + 1 {
        return None;
    }
    let e = (n - d - 1) / 2;
    let q_len = e + d + 1;
    let unknowns = q_len + e;
    // Row layout: [Q_0 .. Q_{e+d}, E_0 .. E_{e-1} | rhs]
    let mut rows: Vec<Vec<u64>> = points
        .iter()
        .map(|t| {
            let mut row = vec![0u64; unknowns + 1];
            let mut xp = 1u64;
            for c in row.iter_mut().take(q_len) {
                *c = xp;
                xp = field.mul(xp, t.x);
            }
            let mut xp = 1u64;
            for s in 0..e {
                row[q_len + s] = field.mul(t.y, xp);
                xp = field.mul(xp, t.x);
            }
            row[unknowns] = field.mul(t.y, xp);
            row
        })
        .collect();
    let solution = solve(field, &mut rows, unknowns)?;
    let q = &solution[..q_len];
    let mut err = solution[q_len..].to_vec();
    err.push(1);
    let (quot, rem) = poly_divmod(field, q, &err);
    if rem.iter().any(|&c| c != 0) {
        return None;
    }
    let mut coeffs = quot;
    if coeffs.iter().skip(d + 1).any(|&c| c != 0) {
        return None;
    }
    coeffs.resize(d + 1, 0);
    let p = Polynomial {
        spec: field.spec(),
        coeffs,
    };
    let agree = support(field, &p, points);
    (2 * agree > n + d).then_some(p)
}

/// Gaussian elimination over the field; any solution, free variables zero.
fn solve(field: &Field, rows: &mut [Vec<u64>], unknowns: usize) -> Option<Vec<u64>> {
    let mut pivots = Vec::with_capacity(unknowns);
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = field.inv(rows[r][col]).expect("pivot is nonzero");
        for v in &mut rows[r][col..=unknowns] {
            *v = field.mul(*v, inv);
        }
        let (before, rest) = rows.split_at_mut(r);
        let (pivot_row, after) = rest.split_first_mut().expect("row r exists");
        for row in before.iter_mut().chain(after.iter_mut()) {
            let factor = row[col];
            if factor != 0 {
                for c in col..=unknowns {
                    row[c] ^= field.mul(factor, pivot_row[c]);
                }
            }
        }
        pivots.push((r, col));
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| row[unknowns] != 0) {
        return None;
    }
    let mut x = vec![0u64; unknowns];
    for (row, col) in pivots {
        x[col] = rows[row][unknowns];
    }
    Some(x)
}

/// Polynomial long division, coefficients lowest degree first.
fn poly_divmod(field: &Field, num: &[u64], den: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let den_deg = den.iter().rposition(|&c| c != 0).expect("nonzero divisor");
    let lead_inv = field.inv(den[den_deg]).expect("nonzero leading term");
    let mut rem = num.to_vec();
    if rem.len() <= den_deg {
        return (vec![0], rem);
    }
    let mut quot = vec![0u64; rem.len() - den_deg];
    for i in (den_deg..rem.len()).rev() {
        let c = field.mul(rem[i], lead_inv);
        if c == 0 {
            continue;
        }
        quot[i - den_deg] = c;
        for (j, &dc) in den[..=den_deg].iter().enumerate() {
            rem[i - den_deg + j] ^= field.mul(c, dc);
        }
    }
    rem.truncate(den_deg);
    (quot, rem)
}

fn best_support_exhaustive(field: &Field, points: &[EvaluationTuple], d: usize) -> Polynomial {
    let q = field.spec().order() as u64;
    let mut coeffs = vec![0u64; d + 1];
    let mut best: Option<(usize, Polynomial)> = None;
    loop {
        let candidate = Polynomial {
            spec: field.spec(),
            coeffs: coeffs.clone(),
        };
        let s = support(field, &candidate, points);
        let better = match &best {
            None => true,
            Some((bs, bp)) => s > *bs || (s == *bs && candidate.cmp_lex(bp).is_lt()),
        };
        if better {
            best = Some((s, candidate));
        }
        // Odometer over all q^(d+1) coefficient vectors.
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return best.expect("at least one candidate").1;
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(k: u32) -> Field {
        Field::with_degree(k).unwrap()
    }

    fn points_of(
        field: &Field,
        p: &Polynomial,
        xs: impl IntoIterator<Item = u64>,
    ) -> Vec<EvaluationTuple> {
        xs.into_iter()
            .map(|x| EvaluationTuple::new(x, p.evaluate(field, x)))
            .collect()
    }

    #[test]
    fn pack_zero_message() {
        let spec = FieldSpec::new(10).unwrap();
        let p = pack_message(&[false; 37], 3, spec).unwrap();
        assert!(p.is_zero());
        assert_eq!(unpack_message(&p, 37).unwrap(), vec![false; 37]);
    }

    #[test]
    fn pack_chunk_layout() {
        let spec = FieldSpec::new(10).unwrap();
        let mut m = vec![false; 20];
        m[0] = true; // coefficient 0, bit 0
        m[9] = true; // coefficient 0, bit 9
        m[11] = true; // coefficient 1, bit 1
        let p = pack_message(&m, 1, spec).unwrap();
        assert_eq!(p.coeffs(), &[0b10_0000_0001, 0b10]);
    }

    #[test]
    fn pack_capacity_error() {
        let spec = FieldSpec::new(4).unwrap();
        assert_eq!(
            pack_message(&[true; 9], 1, spec),
            Err(CodeError::Capacity {
                needed: 9,
                available: 8
            })
        );
    }

    #[test]
    fn unpack_ignores_padding() {
        let spec = FieldSpec::new(4).unwrap();
        let p = Polynomial::from_coeffs(spec, vec![0b0101, 0b1111]).unwrap();
        assert_eq!(bits::render(&unpack_message(&p, 5).unwrap()), "10101");
    }

    #[test]
    fn evaluate_basics() {
        let field = gf(4);
        let spec = field.spec();
        let c = Polynomial::from_coeffs(spec, vec![7, 0, 0]).unwrap();
        let id = Polynomial::from_coeffs(spec, vec![0, 1]).unwrap();
        for x in 0..16 {
            assert_eq!(c.evaluate(&field, x), 7);
            assert_eq!(id.evaluate(&field, x), x);
        }
        let x = spec.element(3).unwrap();
        assert_eq!(evaluate(&id, x).unwrap(), x);
        let other = FieldSpec::new(3).unwrap().one();
        assert!(evaluate(&id, other).is_err());
    }

    #[test]
    fn majority_examples() {
        let m: TupleMultiset = [(3, 5), (3, 5), (3, 7)]
            .into_iter()
            .map(|(x, y)| EvaluationTuple::new(x, y))
            .collect();
        assert_eq!(majority_filter(&m), vec![EvaluationTuple::new(3, 5)]);
        let m: TupleMultiset = [(3, 7), (3, 5)]
            .into_iter()
            .map(|(x, y)| EvaluationTuple::new(x, y))
            .collect();
        assert_eq!(majority_filter(&m), vec![EvaluationTuple::new(3, 5)]);
        assert!(majority_filter(&TupleMultiset::new()).is_empty());
    }

    #[test]
    fn get_polynomial_interpolates_clean_points() {
        let field = gf(4);
        let p = Polynomial::from_coeffs(field.spec(), vec![3, 9, 1]).unwrap();
        let pts = points_of(&field, &p, [5, 0, 11]);
        assert_eq!(get_polynomial(&field, &pts, 2).unwrap(), p);
    }

    #[test]
    fn get_polynomial_errors() {
        let field = gf(3);
        let pts = vec![EvaluationTuple::new(1, 1)];
        assert_eq!(
            get_polynomial(&field, &pts, 1),
            Err(CodeError::InsufficientPoints { needed: 2, got: 1 })
        );
        let pts = vec![EvaluationTuple::new(1, 1), EvaluationTuple::new(1, 2)];
        assert_eq!(
            get_polynomial(&field, &pts, 1),
            Err(CodeError::DuplicatePoint(1))
        );
    }

    #[test]
    fn berlekamp_welch_corrects_within_radius() {
        let field = gf(8);
        let p = Polynomial::from_coeffs(field.spec(), vec![17, 200, 3, 99]).unwrap();
        let mut pts = points_of(&field, &p, 0..12);
        // n = 12, d = 3: up to 4 errors.
        for i in [1, 4, 7, 10] {
            pts[i].y ^= 0x5a;
        }
        assert_eq!(berlekamp_welch(&field, &pts, 3), Some(p.clone()));
        assert_eq!(get_polynomial(&field, &pts, 3).unwrap(), p);
    }

    #[test]
    fn fallback_is_least_x_interpolant() {
        let field = gf(8);
        let p = Polynomial::from_coeffs(field.spec(), vec![1, 2, 3, 4]).unwrap();
        let mut pts = points_of(&field, &p, 0..6);
        for t in pts.iter_mut().skip(3) {
            t.y ^= 1;
        }
        pts[0].y ^= 1;
        let got = get_polynomial(&field, &pts, 3).unwrap();
        let expected = interpolate(&field, &pts[..4]);
        assert_eq!(got.coeffs(), expected.as_slice());
    }
}
