//! Local fields ℚ_p and 𝔽_p((t)) at finite digit precision.
//!
//! An element is a finite digit string `c_k, c_{k+1}, …, c_M` over the
//! representatives `{0, …, p - 1}`, read as `Σ c_l 𝔭^l`. In p-adic mode the
//! digits carry under addition and multiplication; in Laurent mode they are
//! coefficients in 𝔽_p and combine without carries.
//!
//! Negation is not closed on finite p-adic digit strings (`-1 = (p-1)(p-1)…`),
//! so every subtraction takes an explicit precision and returns the canonical
//! representative of the result modulo 𝔓^prec.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q_pow, Rational};

/// Hard ceiling on the number of cells of any window built by the library.
pub const MAX_CELLS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// ℚ_p: digit strings with carries.
    Padic,
    /// 𝔽_p((t)): digit-wise arithmetic mod p.
    Laurent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldConfigRecord {
    mode: Mode,
    p: u32,
}

/// The field model: arithmetic mode and residue characteristic (q = p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldConfigRecord")]
pub struct FieldConfig {
    mode: Mode,
    p: u32,
}

impl TryFrom<FieldConfigRecord> for FieldConfig {
    type Error = Error;

    fn try_from(rec: FieldConfigRecord) -> Result<Self> {
        FieldConfig::new(rec.mode, rec.p)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Number of cosets of 𝔓^l in 𝔓^a, i.e. `p^(l - a)`.
pub fn cell_count(p: u32, a: i64, l: i64) -> Result<usize> {
    if a > l {
        return Err(Error::InvalidWindow { a, l });
    }
    let n = (l - a) as u32;
    let cells = (p as u128).checked_pow(n).unwrap_or(u128::MAX);
    if cells > MAX_CELLS as u128 {
        return Err(Error::WindowTooLarge { cells, cap: MAX_CELLS as u128 });
    }
    Ok(cells as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
struct ElementRecord {
    level: Option<i64>,
    digits: Vec<u32>,
}

/// An element of K with finitely many nonzero digits.
///
/// Zero is the only element with `level == None`; otherwise the first and
/// last stored digits are nonzero, so equal elements have equal
/// representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ElementRecord", into = "ElementRecord")]
pub struct FieldElement {
    level: Option<i64>,
    digits: Vec<u32>,
}

impl TryFrom<ElementRecord> for FieldElement {
    type Error = Error;

    fn try_from(rec: ElementRecord) -> Result<Self> {
        match rec.level {
            None if rec.digits.iter().all(|&d| d == 0) => Ok(FieldElement::zero()),
            None => Err(Error::MalformedElement("zero element must have no digits".into())),
            Some(level) => Ok(FieldElement::new(level, rec.digits)),
        }
    }
}

impl From<FieldElement> for ElementRecord {
    fn from(x: FieldElement) -> Self {
        ElementRecord { level: x.level, digits: x.digits }
    }
}

impl FieldElement {
    pub fn zero() -> Self {
        FieldElement { level: None, digits: Vec::new() }
    }

    pub fn one() -> Self {
        FieldElement { level: Some(0), digits: vec![1] }
    }

    /// 𝔭^j.
    pub fn prime_power(j: i64) -> Self {
        FieldElement { level: Some(j), digits: vec![1] }
    }

    /// Builds `Σ digits[i] 𝔭^(level + i)`, stripping leading and trailing
    /// zero digits. Digits are not checked against p; see
    /// [`FieldConfig::element`] for the validating constructor.
    pub fn new(level: i64, mut digits: Vec<u32>) -> Self {
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        if lead == digits.len() {
            return FieldElement::zero();
        }
        digits.drain(..lead);
        FieldElement { level: Some(level + lead as i64), digits }
    }

    pub fn is_zero(&self) -> bool {
        self.level.is_none()
    }

    /// The leading level k, so that |x| = q^(-k); `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        self.level
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Digit at a given level (zero outside the stored range).
    pub fn digit(&self, level: i64) -> u32 {
        match self.level {
            Some(k) if level >= k => self.digits.get((level - k) as usize).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// One past the highest nonzero level; `None` for zero.
    pub fn end_level(&self) -> Option<i64> {
        self.level.map(|k| k + self.digits.len() as i64)
    }

    /// 𝔭^j x.
    pub fn prime_shift(&self, j: i64) -> Self {
        FieldElement { level: self.level.map(|k| k + j), digits: self.digits.clone() }
    }

    /// x' = 𝔭^(-v(x)) x, the unit with x = 𝔭^v(x) x'.
    pub fn angular_part(&self) -> Result<Self> {
        match self.level {
            None => Err(Error::ZeroElement),
            Some(k) => Ok(self.prime_shift(-k)),
        }
    }

    /// Keeps only the digits at levels strictly below `below`: the canonical
    /// representative of x modulo 𝔓^below.
    pub fn truncate(&self, below: i64) -> Self {
        match self.level {
            Some(k) if k < below => {
                let keep = ((below - k) as usize).min(self.digits.len());
                FieldElement::new(k, self.digits[..keep].to_vec())
            }
            _ => FieldElement::zero(),
        }
    }

    /// Dense digits at levels `lo .. lo + len`.
    fn dense(&self, lo: i64, len: usize) -> Vec<u64> {
        (0..len).map(|i| self.digit(lo + i as i64) as u64).collect()
    }
}

impl FieldConfig {
    pub fn new(mode: Mode, p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldConfig { mode, p })
    }

    pub fn padic(p: u32) -> Result<Self> {
        Self::new(Mode::Padic, p)
    }

    pub fn laurent(p: u32) -> Result<Self> {
        Self::new(Mode::Laurent, p)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Cardinality of the residue field. Only q = p is supported.
    pub fn q(&self) -> u32 {
        self.p
    }

    /// Validating constructor: every digit must lie in `0..p`.
    pub fn element(&self, level: i64, digits: Vec<u32>) -> Result<FieldElement> {
        for (i, &d) in digits.iter().enumerate() {
            if d >= self.p {
                return Err(Error::DigitOutOfRange { digit: d, level: level + i as i64, p: self.p });
            }
        }
        Ok(FieldElement::new(level, digits))
    }

    pub fn check(&self, x: &FieldElement) -> Result<()> {
        match x.level {
            None => Ok(()),
            Some(k) => self.element(k, x.digits.clone()).map(|_| ()),
        }
    }

    /// The base-p expansion of a nonnegative integer.
    pub fn from_u64(&self, mut n: u64) -> FieldElement {
        let p = self.p as u64;
        let mut digits = Vec::new();
        while n > 0 {
            digits.push((n % p) as u32);
            n /= p;
        }
        FieldElement::new(0, digits)
    }

    pub fn abs(&self, x: &FieldElement) -> f64 {
        match x.level {
            None => 0.0,
            Some(k) => (self.p as f64).powi(-k as i32),
        }
    }

    pub fn abs_exact(&self, x: &FieldElement) -> Rational {
        match x.level {
            None => Rational::from_integer(0.into()),
            Some(k) => q_pow(self.p, -k),
        }
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let (lo, hi) = match (x.level, y.level, x.end_level(), y.end_level()) {
            (None, _, _, _) => return y.clone(),
            (_, None, _, _) => return x.clone(),
            (Some(a), Some(b), Some(ea), Some(eb)) => (a.min(b), ea.max(eb)),
            _ => unreachable!(),
        };
        let len = (hi - lo) as usize;
        let (dx, dy) = (x.dense(lo, len), y.dense(lo, len));
        let p = self.p as u64;
        let mut out = Vec::with_capacity(len + 1);
        match self.mode {
            Mode::Padic => {
                let mut carry = 0u64;
                for i in 0..len {
                    let s = dx[i] + dy[i] + carry;
                    out.push((s % p) as u32);
                    carry = s / p;
                }
                if carry > 0 {
                    out.push(carry as u32);
                }
            }
            Mode::Laurent => {
                out.extend((0..len).map(|i| ((dx[i] + dy[i]) % p) as u32));
            }
        }
        FieldElement::new(lo, out)
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let (a, b) = match (x.level, y.level) {
            (Some(a), Some(b)) => (a, b),
            _ => return FieldElement::zero(),
        };
        let p = self.p as u64;
        let n = x.digits.len() + y.digits.len() - 1;
        let mut acc = vec![0u64; n];
        for (i, &dx) in x.digits.iter().enumerate() {
            for (j, &dy) in y.digits.iter().enumerate() {
                acc[i + j] += dx as u64 * dy as u64;
                if self.mode == Mode::Laurent {
                    acc[i + j] %= p;
                }
            }
        }
        let mut out = Vec::with_capacity(n + 2);
        match self.mode {
            Mode::Padic => {
                let mut carry = 0u64;
                for v in acc {
                    let s = v + carry;
                    out.push((s % p) as u32);
                    carry = s / p;
                }
                while carry > 0 {
                    out.push((carry % p) as u32);
                    carry /= p;
                }
            }
            Mode::Laurent => out.extend(acc.into_iter().map(|v| v as u32)),
        }
        FieldElement::new(a + b, out)
    }

    /// The representative of -x modulo 𝔓^prec (digits at levels < prec only).
    pub fn neg_mod(&self, x: &FieldElement, prec: i64) -> FieldElement {
        let k = match x.level {
            Some(k) if k < prec => k,
            _ => return FieldElement::zero(),
        };
        let p = self.p;
        let len = (prec - k) as usize;
        let digits: Vec<u32> = match self.mode {
            Mode::Padic => (0..len)
                .map(|i| {
                    let c = x.digit(k + i as i64);
                    if i == 0 {
                        p - c
                    } else {
                        p - 1 - c
                    }
                })
                .collect(),
            Mode::Laurent => (0..len).map(|i| (p - x.digit(k + i as i64)) % p).collect(),
        };
        FieldElement::new(k, digits)
    }

    /// The representative of x - y modulo 𝔓^prec.
    pub fn sub_mod(&self, x: &FieldElement, y: &FieldElement, prec: i64) -> FieldElement {
        self.add(&x.truncate(prec), &self.neg_mod(y, prec)).truncate(prec)
    }

    /// The fixed base character χ: trivial on 𝔇, nontrivial on 𝔓^{-1}.
    ///
    /// p-adic: χ(z) = exp(2πi · frac_p(z)) with frac_p(z) = Σ_{l<0} c_l p^l.
    /// Laurent: χ(z) = exp(2πi · c_{-1} / p).
    pub fn base_character(&self, z: &FieldElement) -> Complex64 {
        let v = match z.level {
            Some(v) if v < 0 => v,
            _ => return Complex64::new(1.0, 0.0),
        };
        let frac = match self.mode {
            Mode::Laurent => z.digit(-1) as f64 / self.p as f64,
            Mode::Padic => padic_fraction(self.p, z, v),
        };
        let (s, c) = (TAU * frac).sin_cos();
        Complex64::new(c, s)
    }

    /// χ_λ(x) = χ(λx).
    pub fn character(&self, lambda: &FieldElement, x: &FieldElement) -> Complex64 {
        self.base_character(&self.mul(lambda, x))
    }

    /// Index of the coset x + 𝔓^l inside 𝔓^a, or `None` when x ∉ 𝔓^a.
    ///
    /// The index is `Σ_t c_{a+t} p^t`: the digit at level `a` varies fastest.
    pub fn coset_index(&self, x: &FieldElement, a: i64, l: i64) -> Option<usize> {
        if let Some(v) = x.level {
            if v < a {
                return None;
            }
        }
        let p = self.p as usize;
        let mut idx = 0usize;
        for level in (a..l).rev() {
            idx = idx * p + x.digit(level) as usize;
        }
        Some(idx)
    }

    /// The canonical representative (digits at levels `a..l` only) of the
    /// coset with the given index.
    pub fn coset_representative(&self, a: i64, l: i64, mut idx: usize) -> FieldElement {
        let p = self.p as usize;
        let mut digits = Vec::with_capacity((l - a).max(0) as usize);
        for _ in a..l {
            digits.push((idx % p) as u32);
            idx /= p;
        }
        FieldElement::new(a, digits)
    }

    /// Representatives of all cosets of 𝔓^l in 𝔓^a, in index order.
    pub fn enumerate_cosets(&self, a: i64, l: i64) -> Result<Vec<FieldElement>> {
        let n = cell_count(self.p, a, l)?;
        Ok((0..n).map(|i| self.coset_representative(a, l, i)).collect())
    }
}

fn padic_fraction(p: u32, z: &FieldElement, v: i64) -> f64 {
    // frac_p(z) = N / p^(-v) with N = Σ_{l=v}^{-1} c_l p^(l - v).
    let depth = (-v) as u32;
    if let Some(den) = (p as u128).checked_pow(depth) {
        let mut num = 0u128;
        for level in (v..0).rev() {
            num = num * p as u128 + z.digit(level) as u128;
        }
        return num as f64 / den as f64;
    }
    let mut acc = 0.0;
    for level in v..0 {
        acc += z.digit(level) as f64 * (p as f64).powi(level as i32);
    }
    acc.fract()
}

/// The quotient group 𝔓^a / 𝔓^l on coset indices: ℤ/p^n in p-adic mode,
/// (ℤ/p)^n in Laurent mode, with n = l - a.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosetGroup {
    mode: Mode,
    p: usize,
    n: u32,
    size: usize,
}

impl CosetGroup {
    pub fn new(field: FieldConfig, a: i64, l: i64) -> Result<Self> {
        let size = cell_count(field.p, a, l)?;
        Ok(CosetGroup { mode: field.mode, p: field.p as usize, n: (l - a) as u32, size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn add(&self, i: usize, j: usize) -> usize {
        match self.mode {
            Mode::Padic => (i + j) % self.size,
            Mode::Laurent => self.digitwise(i, j, |a, b| a + b),
        }
    }

    pub fn neg(&self, i: usize) -> usize {
        match self.mode {
            Mode::Padic => (self.size - i) % self.size,
            Mode::Laurent => self.digitwise(i, 0, |a, _| self.p - a),
        }
    }

    pub fn sub(&self, i: usize, j: usize) -> usize {
        match self.mode {
            Mode::Padic => (i + self.size - j) % self.size,
            Mode::Laurent => self.digitwise(i, j, |a, b| a + self.p - b),
        }
    }

    /// Position of the lowest nonzero digit; `None` for the zero coset.
    pub fn leading_position(&self, mut i: usize) -> Option<u32> {
        if i == 0 {
            return None;
        }
        let mut t = 0;
        while i % self.p == 0 {
            i /= self.p;
            t += 1;
        }
        Some(t)
    }

    fn digitwise(&self, mut i: usize, mut j: usize, op: impl Fn(usize, usize) -> usize) -> usize {
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.n {
            out += (op(i % self.p, j % self.p) % self.p) * scale;
            i /= self.p;
            j /= self.p;
            scale *= self.p;
        }
        out
    }
}

/// The ball `center + 𝔓^scale`; the center is stored modulo 𝔓^scale.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ball {
    center: FieldElement,
    scale: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallRelation {
    Disjoint,
    Equal,
    /// The first ball strictly contains the second.
    Contains,
    /// The first ball is strictly contained in the second.
    ContainedIn,
}

impl Ball {
    pub fn new(center: FieldElement, scale: i64) -> Self {
        Ball { center: center.truncate(scale), scale }
    }

    /// 𝔓^k.
    pub fn ideal(k: i64) -> Self {
        Ball::new(FieldElement::zero(), k)
    }

    pub fn center(&self) -> &FieldElement {
        &self.center
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn measure(&self, field: &FieldConfig) -> Rational {
        q_pow(field.q(), -self.scale)
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        x.truncate(self.scale) == self.center
    }

    pub fn relation(&self, other: &Ball) -> BallRelation {
        let outer_scale = self.scale.min(other.scale);
        if self.center.truncate(outer_scale) != other.center.truncate(outer_scale) {
            return BallRelation::Disjoint;
        }
        match self.scale.cmp(&other.scale) {
            Ordering::Equal => BallRelation::Equal,
            Ordering::Less => BallRelation::Contains,
            Ordering::Greater => BallRelation::ContainedIn,
        }
    }
}

/// The sphere A_j = {y : |y| = q^(j+1)}; A_{-1} is the unit group 𝔇*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sphere {
    pub radius_exponent: i64,
}

impl Sphere {
    pub fn new(j: i64) -> Self {
        Sphere { radius_exponent: j }
    }

    /// The valuation of every element of the sphere, -(j+1).
    pub fn level(&self) -> i64 {
        -(self.radius_exponent + 1)
    }

    pub fn contains(&self, y: &FieldElement) -> bool {
        y.valuation() == Some(self.level())
    }

    /// q^(j+1) (1 - q^{-1}).
    pub fn measure(&self, field: &FieldConfig) -> Rational {
        let q = field.q();
        q_pow(q, self.radius_exponent) * Rational::from_integer((q - 1).into())
    }
}
