//! Rough angular kernels Ω on 𝔇*, (1,∞) atoms, and the Haar atomic
//! decomposition.
//!
//! A kernel of resolution `m` is constant on the cosets of 𝔓^m inside 𝔇*.
//! Values are stored as exact Gaussian rationals, indexed by the digit
//! string `(c_0, …, c_{m-1})` with `c_0 ∈ 1..q` outermost and `c_{m-1}`
//! fastest, so every prefix selects a contiguous block.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    exact_from_complex, exact_to_complex, exact_zero, is_exact_zero, norm_sqr, q_pow, rational_from_f64,
    rational_to_f64, ExactComplex, Rational,
};
use crate::field::{CosetGroup, FieldConfig, FieldElement};
use crate::testfn::{TestFunction, Window};

/// Serialized form: `{"m": int, "values": [[re, im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularKernelRecord {
    pub m: u32,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngularKernel {
    field: FieldConfig,
    m: u32,
    values: Vec<ExactComplex>,
}

/// Number of cells of 𝔇* at resolution m, (q-1) q^(m-1).
pub fn unit_cells(field: &FieldConfig, m: u32) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidResolution);
    }
    let q = field.q() as usize;
    Ok((q - 1) * crate::field::cell_count(field.p(), 1, m as i64)?)
}

/// |𝔇*|^{-1} = q / (q - 1), the atom sup bound.
pub fn atom_sup_bound(q: u32) -> Rational {
    Rational::new(q.into(), (q - 1).into())
}

impl AngularKernel {
    /// Stores the values as given; [`AngularKernel::is_mean_zero`] reports validity.
    pub fn new(field: FieldConfig, m: u32, values: &[Complex64]) -> Result<Self> {
        let exact = values.iter().map(|&z| exact_from_complex(z)).collect::<Result<Vec<_>>>()?;
        Self::from_exact(field, m, exact)
    }

    pub fn from_exact(field: FieldConfig, m: u32, values: Vec<ExactComplex>) -> Result<Self> {
        let n = unit_cells(&field, m)?;
        if values.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: values.len() });
        }
        Ok(AngularKernel { field, m, values })
    }

    pub fn zero(field: FieldConfig, m: u32) -> Result<Self> {
        let n = unit_cells(&field, m)?;
        Ok(AngularKernel { field, m, values: vec![exact_zero(); n] })
    }

    pub fn from_record(field: FieldConfig, rec: &AngularKernelRecord) -> Result<Self> {
        let values: Vec<Complex64> = rec.values.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        Self::new(field, rec.m, &values)
    }

    pub fn to_record(&self) -> AngularKernelRecord {
        AngularKernelRecord { m: self.m, values: self.values().into_iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn resolution(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn exact_values(&self) -> &[ExactComplex] {
        &self.values
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.values.iter().map(exact_to_complex).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(is_exact_zero)
    }

    /// Σ values, exactly. The integral over 𝔇* is this times q^(-m).
    pub fn exact_sum(&self) -> ExactComplex {
        self.values.iter().fold(exact_zero(), |acc, v| acc + v)
    }

    pub fn integral(&self) -> ExactComplex {
        self.exact_sum() * q_pow(self.field.q(), -(self.m as i64))
    }

    pub fn is_mean_zero(&self) -> bool {
        is_exact_zero(&self.exact_sum())
    }

    /// Subtracts the 𝔇*-average from every cell.
    pub fn mean_zero_project(&self) -> Self {
        let avg = self.exact_sum() / Rational::from_integer(self.values.len().into());
        let values = self.values.iter().map(|v| v - &avg).collect();
        AngularKernel { field: self.field, m: self.m, values }
    }

    /// Digits `(c_0, …, c_{m-1})` of the cell with the given index.
    pub fn digits_of(&self, idx: usize) -> Vec<u32> {
        let q = self.field.q() as usize;
        let mut digits = vec![0u32; self.m as usize];
        let mut rest = idx;
        for t in (1..self.m as usize).rev() {
            digits[t] = (rest % q) as u32;
            rest /= q;
        }
        digits[0] = rest as u32 + 1;
        digits
    }

    /// Index of the cell of a unit (digits at levels 0..m; c_0 ≠ 0).
    pub fn index_of_unit(&self, u: &FieldElement) -> usize {
        let q = self.field.q() as usize;
        let mut idx = u.digit(0) as usize - 1;
        for t in 1..self.m as i64 {
            idx = idx * q + u.digit(t) as usize;
        }
        idx
    }

    /// Converts a coset index of 𝔓^0 / 𝔓^m (level 0 fastest) to a kernel
    /// index, or `None` when the coset lies in 𝔓.
    pub fn index_of_coset(&self, coset: usize) -> Option<usize> {
        let q = self.field.q() as usize;
        let c0 = coset % q;
        if c0 == 0 {
            return None;
        }
        let mut idx = c0 - 1;
        let mut rest = coset / q;
        for _ in 1..self.m {
            idx = idx * q + rest % q;
            rest /= q;
        }
        Some(idx)
    }

    pub fn value_at_unit(&self, u: &FieldElement) -> Complex64 {
        exact_to_complex(&self.values[self.index_of_unit(u)])
    }

    /// Ω(y) = Ω(angularPart(y)) read at its first m digits.
    pub fn evaluate_homogeneous(&self, y: &FieldElement) -> Result<Complex64> {
        Ok(self.value_at_unit(&y.angular_part()?))
    }

    pub fn evaluate_homogeneous_exact(&self, y: &FieldElement) -> Result<&ExactComplex> {
        Ok(&self.values[self.index_of_unit(&y.angular_part()?)])
    }

    /// Ω_ext Φ_{|y| = q^{-s}} as a test function on the window (s, s + m).
    pub fn on_shell(&self, s: i64) -> TestFunction {
        let window = Window { a: s, l: s + self.m as i64 };
        let n = (self.field.q() as usize).pow(self.m);
        let values = (0..n)
            .map(|c| match self.index_of_coset(c) {
                Some(i) => exact_to_complex(&self.values[i]),
                None => Complex64::new(0.0, 0.0),
            })
            .collect();
        TestFunction::from_values(self.field, window, values).expect("shell window has q^m cells")
    }

    /// The same kernel at a finer resolution.
    pub fn refine(&self, m: u32) -> Result<Self> {
        if m < self.m {
            return Err(Error::InvalidResolution);
        }
        let rep = (self.field.q() as usize).pow(m - self.m);
        let values = self.values.iter().flat_map(|v| std::iter::repeat(v.clone()).take(rep)).collect();
        Ok(AngularKernel { field: self.field, m, values })
    }

    pub fn add(&self, other: &AngularKernel) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let m = self.m.max(other.m);
        let (a, b) = (self.refine(m)?, other.refine(m)?);
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
        Ok(AngularKernel { field: self.field, m, values })
    }

    pub fn scale(&self, c: &ExactComplex) -> Self {
        AngularKernel { field: self.field, m: self.m, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// max |Ω|², exactly.
    pub fn sup_norm_sqr(&self) -> Rational {
        self.values.iter().map(norm_sqr).max().unwrap_or_else(Rational::zero)
    }

    pub fn sup_norm(&self) -> f64 {
        rational_to_f64(&self.sup_norm_sqr()).sqrt()
    }

    /// E_t: averages over the blocks sharing the first t digits (t = 0 is
    /// the 𝔇*-average).
    pub fn conditional_expectation(&self, t: u32) -> Self {
        let q = self.field.q() as usize;
        let block = if t == 0 { self.values.len() } else { q.pow(self.m - t) };
        let count = Rational::from_integer(block.into());
        let mut values = Vec::with_capacity(self.values.len());
        for chunk in self.values.chunks(block) {
            let avg = chunk.iter().fold(exact_zero(), |acc, v| acc + v) / count.clone();
            values.extend(std::iter::repeat(avg).take(block));
        }
        AngularKernel { field: self.field, m: self.m, values }
    }
}

/// A kernel known to satisfy the three (1,∞) atom conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom(AngularKernel);

impl Atom {
    pub fn new(kernel: AngularKernel) -> Result<Self> {
        let report = validate_atom(&kernel);
        match report.violations.first() {
            None => Ok(Atom(kernel)),
            Some(v) => Err(Error::InvalidAtom(v.to_string())),
        }
    }

    pub fn kernel(&self) -> &AngularKernel {
        &self.0
    }

    pub fn into_kernel(self) -> AngularKernel {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomViolation {
    Support,
    SupBound,
    MeanZero,
}

impl std::fmt::Display for AtomViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AtomViolation::Support => "support not contained in the unit group",
            AtomViolation::SupBound => "sup norm exceeds (1 - 1/q)^-1",
            AtomViolation::MeanZero => "integral is not zero",
        })
    }
}

/// Outcome of the atom checks, in the order support, sup bound, mean zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomReport {
    pub valid: bool,
    pub violations: Vec<AtomViolation>,
}

impl AtomReport {
    fn from_flags(support: bool, sup: bool, mean: bool) -> Self {
        let mut violations = Vec::new();
        if !support {
            violations.push(AtomViolation::Support);
        }
        if !sup {
            violations.push(AtomViolation::SupBound);
        }
        if !mean {
            violations.push(AtomViolation::MeanZero);
        }
        AtomReport { valid: violations.is_empty(), violations }
    }

    pub fn first_violation(&self) -> Option<AtomViolation> {
        self.violations.first().copied()
    }
}

/// Atom checks for a kernel-shaped function (support in 𝔇* by construction).
pub fn validate_atom(k: &AngularKernel) -> AtomReport {
    let bound = atom_sup_bound(k.field.q());
    AtomReport::from_flags(true, k.sup_norm_sqr() <= &bound * &bound, k.is_mean_zero())
}

/// Atom checks for an arbitrary test function, all exact.
pub fn validate_atom_function(f: &TestFunction) -> Result<AtomReport> {
    let field = f.field();
    let w = f.window();
    let g = f.refine_to(Window { a: w.a.min(0), l: w.l.max(1) })?;
    let gw = g.window();
    let bound = atom_sup_bound(field.q());
    let bound_sqr = &bound * &bound;
    let (mut support, mut sup) = (true, true);
    let mut sum = exact_zero();
    for (i, &v) in g.values().iter().enumerate() {
        let z = exact_from_complex(v)?;
        if is_exact_zero(&z) {
            continue;
        }
        if field.coset_representative(gw.a, gw.l, i).valuation() != Some(0) {
            support = false;
        }
        if norm_sqr(&z) > bound_sqr {
            sup = false;
        }
        sum = sum + z;
    }
    Ok(AtomReport::from_flags(support, sup, is_exact_zero(&sum)))
}

/// Σ λ_i a_i with real λ_i > 0 and (1,∞) atoms a_i.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicDecomposition {
    pub terms: Vec<(f64, Atom)>,
    pub h1_upper_bound: f64,
}

impl AtomicDecomposition {
    /// Σ λ_i a_i, exactly.
    pub fn reconstruct(&self, field: FieldConfig, m: u32) -> Result<AngularKernel> {
        let mut acc = AngularKernel::zero(field, m)?;
        for (lambda, atom) in &self.terms {
            let c = ExactComplex::new(rational_from_f64(*lambda)?, Rational::zero());
            acc = acc.add(&atom.kernel().scale(&c))?;
        }
        Ok(acc)
    }
}

/// Smallest float λ ≥ the estimate with max|D|² ≤ λ² (q/(q-1))², exactly.
fn saturating_scale(d: &AngularKernel) -> Result<f64> {
    let q = d.field.q();
    let sup_sqr = d.sup_norm_sqr();
    let bound = atom_sup_bound(q);
    let bound_sqr = &bound * &bound;
    let mut lambda = rational_to_f64(&sup_sqr).sqrt() * (1.0 - 1.0 / q as f64);
    loop {
        let l = rational_from_f64(lambda)?;
        if sup_sqr <= &l * &l * &bound_sqr {
            return Ok(lambda);
        }
        lambda = lambda.next_up();
    }
}

/// Haar expansion Ω = Σ_{t=1}^{m} (E_t Ω − E_{t−1} Ω), each nonzero
/// difference scaled to saturate the atom sup bound.
pub fn atomic_decompose(k: &AngularKernel) -> Result<AtomicDecomposition> {
    if !k.is_mean_zero() {
        return Err(Error::NotMeanZero);
    }
    let mut terms = Vec::new();
    let mut prev = k.conditional_expectation(0);
    for t in 1..=k.m {
        let cur = if t == k.m { k.clone() } else { k.conditional_expectation(t) };
        let values: Vec<ExactComplex> = cur.values.iter().zip(&prev.values).map(|(a, b)| a - b).collect();
        let d = AngularKernel { field: k.field, m: k.m, values };
        prev = cur;
        if d.is_zero() {
            continue;
        }
        let lambda = saturating_scale(&d)?;
        let inv = ExactComplex::new(Rational::one() / rational_from_f64(lambda)?, Rational::zero());
        terms.push((lambda, Atom::new(d.scale(&inv))?));
    }
    let h1_upper_bound = terms.iter().map(|(l, _)| l).sum();
    Ok(AtomicDecomposition { terms, h1_upper_bound })
}

/// Partial sum over j = 1..J of sup_{|y|=1} ∫_{𝔇*} |Ω(x + 𝔭^j y) − Ω(x)| dx.
///
/// The sup runs over the cells of 𝔇* at resolution m. Terms with j ≥ m
/// vanish, so only j < m are summed.
pub fn taibleson_modulus(k: &AngularKernel, big_j: u32) -> f64 {
    let field = k.field;
    let q = field.q() as usize;
    let m = k.m;
    let group = CosetGroup::new(field, 0, m as i64).expect("kernel resolution fits a window");
    let n = group.size();
    let values = k.values();
    let mu = (q as f64).powi(-(m as i32));
    let top = big_j.min(m.saturating_sub(1));
    let units: Vec<(usize, usize)> = (0..n).filter_map(|c| k.index_of_coset(c).map(|i| (c, i))).collect();
    units
        .iter()
        .map(|&(y, _)| {
            (1..=top)
                .map(|j| {
                    let shift = (y * q.pow(j)) % n;
                    units
                        .iter()
                        .map(|&(x, ix)| {
                            let moved = k.index_of_coset(group.add(x, shift)).expect("shift keeps the unit group");
                            (values[moved] - values[ix]).norm()
                        })
                        .sum::<f64>()
                        * mu
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
