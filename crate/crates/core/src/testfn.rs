//! The test function class S(K): locally constant, compactly supported
//! functions, stored exactly on a window of cosets.
//!
//! A [`TestFunction`] with window `(a, l)` is supported in 𝔓^a, constant on
//! the cosets of 𝔓^l, and stores one value per coset in the order of
//! [`FieldConfig::enumerate_cosets`]. Binary operations work at the common
//! refinement `(min a, max l)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q_pow, Rational};
use crate::field::{cell_count, Ball, CosetGroup, FieldConfig, FieldElement};
use crate::fourier;

/// Direct summation stays below this many cells; larger convolutions go
/// through the convolution theorem.
pub const DIRECT_CONVOLUTION_CELLS: usize = 256;

/// Support scale `a` (supp ⊆ 𝔓^a) and resolution scale `l >= a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub a: i64,
    pub l: i64,
}

impl Window {
    pub fn new(a: i64, l: i64) -> Result<Self> {
        if a > l {
            return Err(Error::InvalidWindow { a, l });
        }
        Ok(Window { a, l })
    }

    pub fn depth(&self) -> u32 {
        (self.l - self.a) as u32
    }

    pub fn cells(&self, field: &FieldConfig) -> Result<usize> {
        cell_count(field.p(), self.a, self.l)
    }

    /// The smallest window containing both.
    pub fn hull(&self, other: &Window) -> Window {
        Window { a: self.a.min(other.a), l: self.l.max(other.l) }
    }
}

/// Serialized form: `{"a": int, "l": int, "values": [[re, im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionRecord {
    pub a: i64,
    pub l: i64,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    field: FieldConfig,
    window: Window,
    values: Vec<Complex64>,
}

impl TestFunction {
    pub fn zero(field: FieldConfig, window: Window) -> Result<Self> {
        let n = window.cells(&field)?;
        Ok(TestFunction { field, window, values: vec![Complex64::new(0.0, 0.0); n] })
    }

    pub fn from_values(field: FieldConfig, window: Window, values: Vec<Complex64>) -> Result<Self> {
        let n = window.cells(&field)?;
        if values.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: values.len() });
        }
        Ok(TestFunction { field, window, values })
    }

    /// Builds `Σ c_i Φ_{B_i}`. The window is the smallest one holding every
    /// ball at its own scale; an empty list gives the zero function on 𝔇.
    pub fn from_indicator_combo(field: FieldConfig, terms: &[(Complex64, Ball)]) -> Result<Self> {
        if terms.is_empty() {
            return Self::zero(field, Window { a: 0, l: 0 });
        }
        for (_, ball) in terms {
            field.check(ball.center())?;
        }
        let a =
            terms.iter().map(|(_, b)| b.center().valuation().map_or(b.scale(), |v| v.min(b.scale()))).min().unwrap();
        let l = terms.iter().map(|(_, b)| b.scale()).max().unwrap();
        let window = Window::new(a, l)?;
        let mut f = Self::zero(field, window)?;
        let p = field.p() as usize;
        for (c, ball) in terms {
            let k = ball.scale();
            let base = field.coset_index(ball.center(), a, k).expect("center lies in P^a");
            let stride = p.pow((k - a) as u32);
            for h in 0..p.pow((l - k) as u32) {
                f.values[base + stride * h] += *c;
            }
        }
        Ok(f)
    }

    pub fn from_record(field: FieldConfig, rec: &TestFunctionRecord) -> Result<Self> {
        let window = Window::new(rec.a, rec.l)?;
        let values = rec.values.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        Self::from_values(field, window, values)
    }

    pub fn to_record(&self) -> TestFunctionRecord {
        TestFunctionRecord {
            a: self.window.a,
            l: self.window.l,
            values: self.values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Haar measure of one cell, q^(-l).
    pub fn cell_measure(&self) -> f64 {
        (self.field.q() as f64).powi(-self.window.l as i32)
    }

    pub fn cell_measure_exact(&self) -> Rational {
        q_pow(self.field.q(), -self.window.l)
    }

    pub fn evaluate(&self, x: &FieldElement) -> Complex64 {
        match self.field.coset_index(x, self.window.a, self.window.l) {
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value on cell `idx` of another window whose resolution is at least
    /// ours (so each of its cells sits inside one of our cells).
    pub fn value_on_cell(&self, target: Window, idx: usize) -> Complex64 {
        debug_assert!(target.l >= self.window.l);
        let p = self.field.p() as usize;
        let n = self.values.len();
        let Window { a, l } = self.window;
        if target.a <= a {
            let low = p.pow((a - target.a) as u32);
            if idx % low != 0 {
                return Complex64::new(0.0, 0.0);
            }
            self.values[(idx / low) % n]
        } else if target.a >= l {
            self.values[0]
        } else {
            let keep = p.pow((l - target.a) as u32);
            self.values[(idx % keep) * p.pow((target.a - a) as u32)]
        }
    }

    /// The same function on a finer window (`a' <= a`, `l' >= l`).
    pub fn refine_to(&self, target: Window) -> Result<Self> {
        if target.a > self.window.a || target.l < self.window.l {
            return Err(Error::InvalidWindow { a: target.a, l: target.l });
        }
        if target == self.window {
            return Ok(self.clone());
        }
        let n = target.cells(&self.field)?;
        let values = (0..n).map(|i| self.value_on_cell(target, i)).collect();
        Ok(TestFunction { field: self.field, window: target, values })
    }

    /// Multiplies by Φ_{𝔓^a'} and drops the cells outside, `a <= a' <= l`.
    pub fn restrict(&self, a_new: i64) -> Result<Self> {
        let Window { a, l } = self.window;
        if a_new < a || a_new > l {
            return Err(Error::InvalidWindow { a: a_new, l });
        }
        let step = (self.field.p() as usize).pow((a_new - a) as u32);
        let values = self.values.iter().step_by(step).copied().collect();
        Ok(TestFunction { field: self.field, window: Window { a: a_new, l }, values })
    }

    /// Averages onto the coarser resolution `l'` (`a <= l' <= l`). Exact
    /// whenever the function is already constant on 𝔓^l' cosets.
    pub fn coarsen(&self, l_new: i64) -> Result<Self> {
        let Window { a, l } = self.window;
        if l_new < a || l_new > l {
            return Err(Error::InvalidWindow { a, l: l_new });
        }
        let coarse = cell_count(self.field.p(), a, l_new)?;
        let children = self.values.len() / coarse;
        let values = (0..coarse)
            .map(|i| {
                let s: Complex64 = (0..children).map(|c| self.values[i + coarse * c]).sum();
                s / children as f64
            })
            .collect();
        Ok(TestFunction { field: self.field, window: Window { a, l: l_new }, values })
    }

    /// Refines or restricts/coarsens as needed to land on `target`.
    pub fn with_window(&self, target: Window) -> Result<Self> {
        let hull = self.window.hull(&target);
        self.refine_to(hull)?.restrict(target.a)?.coarsen(target.l)
    }

    /// The smallest window representing the same function exactly.
    pub fn canonical(&self) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        if self.values.iter().all(|&v| v == zero) {
            return TestFunction { field: self.field, window: Window { a: 0, l: 0 }, values: vec![zero] };
        }
        let mut f = self.clone();
        let p = self.field.p() as usize;
        while f.window.a < f.window.l && f.values.iter().enumerate().all(|(i, &v)| i % p == 0 || v == zero) {
            f = f.restrict(f.window.a + 1).expect("a < l");
        }
        while f.window.l > f.window.a {
            let coarse = f.values.len() / p;
            let constant = (0..coarse).all(|i| (1..p).all(|c| f.values[i + coarse * c] == f.values[i]));
            if !constant {
                break;
            }
            f = f.coarsen(f.window.l - 1).expect("l > a");
        }
        f
    }

    /// sup |f - g| at the common refinement.
    pub fn max_abs_diff(&self, other: &TestFunction) -> Result<f64> {
        let (f, g) = self.align(other)?;
        Ok(f.values.iter().zip(&g.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &TestFunction, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Both operands refined to their common window.
    pub fn align(&self, other: &TestFunction) -> Result<(TestFunction, TestFunction)> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let w = self.window.hull(&other.window);
        Ok((self.refine_to(w)?, other.refine_to(w)?))
    }

    /// g(x) = f(x - h).
    pub fn translate(&self, h: &FieldElement) -> Result<Self> {
        self.field.check(h)?;
        let Window { a, l } = self.window;
        let v = match h.valuation() {
            Some(v) if v < l => v,
            _ => return Ok(self.clone()),
        };
        let target = Window { a: v.min(a), l };
        let f = self.refine_to(target)?;
        let group = CosetGroup::new(self.field, target.a, target.l)?;
        let shift = self.field.coset_index(&h.truncate(l), target.a, l).unwrap_or(0);
        let values = (0..group.size()).map(|i| f.values[group.sub(i, shift)]).collect();
        Ok(TestFunction { field: self.field, window: target, values })
    }

    /// ‖f‖_r = (Σ |v|^r q^(-l))^(1/r); `r = ∞` gives the sup norm.
    pub fn lr_norm(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(Error::InvalidExponent(r));
        }
        if r.is_infinite() {
            return Ok(self.sup_norm());
        }
        let mu = self.cell_measure();
        let norm = if r == 1.0 {
            self.values.iter().map(|v| v.norm()).sum::<f64>() * mu
        } else if r == 2.0 {
            (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * mu).sqrt()
        } else {
            (self.values.iter().map(|v| v.norm().powf(r)).sum::<f64>() * mu).powf(1.0 / r)
        };
        Ok(norm)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ∫ f.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.cell_measure()
    }

    /// |{x : |f(x)| > λ}| = q^(-l) · #{cells with |v| > λ}, exactly.
    pub fn weak_level_measure(&self, lambda: f64) -> Result<Rational> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveLevel(lambda));
        }
        let count = self.values.iter().filter(|v| v.norm() > lambda).count();
        Ok(self.cell_measure_exact() * Rational::from_integer(count.into()))
    }

    /// (f ∗ g)(x) = ∫ f(x - y) g(y) dy.
    pub fn convolve(&self, other: &TestFunction) -> Result<Self> {
        let (f, g) = self.align(other)?;
        if f.values.len() > DIRECT_CONVOLUTION_CELLS {
            let fh = fourier::forward(&f);
            let gh = fourier::forward(&g);
            let prod = fh.pointwise_product(&gh)?;
            return Ok(fourier::inverse(&prod));
        }
        f.convolve_direct(&g)
    }

    /// Direct O(N²) summation; both operands must share a window.
    pub fn convolve_direct(&self, other: &TestFunction) -> Result<Self> {
        if self.field != other.field || self.window != other.window {
            return Err(Error::FieldMismatch);
        }
        let group = CosetGroup::new(self.field, self.window.a, self.window.l)?;
        let mu = self.cell_measure();
        let n = group.size();
        let values = (0..n)
            .map(|x| {
                let s: Complex64 = (0..n)
                    .filter(|&y| other.values[y] != Complex64::new(0.0, 0.0))
                    .map(|y| self.values[group.sub(x, y)] * other.values[y])
                    .sum();
                s * mu
            })
            .collect();
        Ok(TestFunction { field: self.field, window: self.window, values })
    }

    pub fn add(&self, other: &TestFunction) -> Result<Self> {
        let (mut f, g) = self.align(other)?;
        for (x, y) in f.values.iter_mut().zip(&g.values) {
            *x += y;
        }
        Ok(f)
    }

    pub fn sub(&self, other: &TestFunction) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        TestFunction { field: self.field, window: self.window, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Pointwise map of the stored values.
    pub fn map_values(&self, op: impl Fn(Complex64) -> Complex64) -> Self {
        TestFunction { field: self.field, window: self.window, values: self.values.iter().map(|&v| op(v)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn q2() -> FieldConfig {
        FieldConfig::padic(2).unwrap()
    }

    #[test]
    fn indicator_of_ring_of_integers() {
        let f = TestFunction::from_indicator_combo(q2(), &[(c(1.0), Ball::ideal(0))]).unwrap();
        assert_eq!(f.window(), Window { a: 0, l: 0 });
        assert_eq!(f.values(), &[c(1.0)]);
        assert_eq!(f.evaluate(&FieldElement::prime_power(1)), c(1.0));
        assert_eq!(f.evaluate(&FieldElement::prime_power(-1)), c(0.0));
    }

    #[test]
    fn indicator_cancellation_and_empty() {
        let f =
            TestFunction::from_indicator_combo(q2(), &[(c(1.0), Ball::ideal(0)), (c(-1.0), Ball::ideal(0))]).unwrap();
        assert!(f.values().iter().all(|v| *v == c(0.0)));
        let z = TestFunction::from_indicator_combo(q2(), &[]).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
    }

    #[test]
    fn disjoint_cosets() {
        let f = TestFunction::from_indicator_combo(
            q2(),
            &[(c(2.0), Ball::ideal(1)), (c(3.0), Ball::new(FieldElement::one(), 1))],
        )
        .unwrap();
        assert_eq!(f.window(), Window { a: 0, l: 1 });
        assert_eq!(f.values(), &[c(2.0), c(3.0)]);
    }

    #[test]
    fn norms_of_indicators() {
        let field = FieldConfig::padic(3).unwrap();
        let d = TestFunction::from_indicator_combo(field, &[(c(1.0), Ball::ideal(0))]).unwrap();
        for r in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert!((d.lr_norm(r).unwrap() - 1.0).abs() < 1e-15);
        }
        let p = TestFunction::from_indicator_combo(field, &[(c(1.0), Ball::ideal(1))]).unwrap();
        assert!((p.lr_norm(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.lr_norm(0.5), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn weak_level_of_indicator() {
        let d = TestFunction::from_indicator_combo(q2(), &[(c(1.0), Ball::ideal(0))]).unwrap();
        assert_eq!(d.weak_level_measure(0.5).unwrap(), q_pow(2, 0));
        assert_eq!(d.weak_level_measure(2.0).unwrap(), q_pow(2, 0) * Rational::from_integer(0.into()));
        assert!(d.weak_level_measure(0.0).is_err());
    }

    #[test]
    fn ring_of_integers_is_idempotent_under_convolution() {
        let d = TestFunction::from_indicator_combo(q2(), &[(c(1.0), Ball::ideal(0))]).unwrap();
        let dd = d.convolve(&d).unwrap();
        assert!(dd.approx_eq(&d, 1e-15));
        let zero = TestFunction::zero(q2(), Window::new(-2, 1).unwrap()).unwrap();
        assert_eq!(d.convolve(&zero).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn translate_by_zero_and_back() {
        let field = FieldConfig::padic(3).unwrap();
        let f = TestFunction::from_values(field, Window::new(-1, 1).unwrap(), (0..9).map(|i| c(i as f64)).collect())
            .unwrap();
        assert_eq!(f.translate(&FieldElement::zero()).unwrap(), f);
        let h = field.element(-2, vec![1, 2]).unwrap();
        let g = f.translate(&h).unwrap();
        assert_eq!(g.window().a, -2);
        let back = g.translate(&field.neg_mod(&h, 1)).unwrap();
        assert!(back.approx_eq(&f, 0.0));
        assert_eq!(g.lr_norm(2.0).unwrap(), f.lr_norm(2.0).unwrap());
    }

    #[test]
    fn refine_then_coarsen_is_identity() {
        let field = FieldConfig::laurent(2).unwrap();
        let f = TestFunction::from_values(field, Window::new(0, 2).unwrap(), vec![c(1.0), c(2.0), c(-1.0), c(0.5)])
            .unwrap();
        let r = f.refine_to(Window::new(-2, 4).unwrap()).unwrap();
        let back = r.with_window(f.window()).unwrap();
        assert_eq!(back, f);
        assert_eq!(r.canonical(), f);
    }

    #[test]
    fn linear_space_operations() {
        let field = FieldConfig::padic(2).unwrap();
        let f = TestFunction::from_values(field, Window::new(0, 1).unwrap(), vec![c(1.0), c(-3.0)]).unwrap();
        let z = f.add(&f.scale(c(-1.0))).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
        for r in [1.0, 2.0, 3.0] {
            assert!((f.scale(c(2.0)).lr_norm(r).unwrap() - 2.0 * f.lr_norm(r).unwrap()).abs() < 1e-14);
        }
        let g = TestFunction::from_indicator_combo(field, &[(c(1.0), Ball::ideal(-1))]).unwrap();
        let s = f.add(&g).unwrap();
        let x = FieldElement::one();
        assert_eq!(s.evaluate(&x), f.evaluate(&x) + g.evaluate(&x));
    }

    #[test]
    fn record_round_trip() {
        let f = TestFunction::from_values(q2(), Window::new(-1, 0).unwrap(), vec![c(1.0), Complex64::new(0.0, 2.0)])
            .unwrap();
        let s = serde_json::to_string(&f.to_record()).unwrap();
        assert_eq!(s, r#"{"a":-1,"l":0,"values":[[1.0,0.0],[0.0,2.0]]}"#);
        let rec: TestFunctionRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(TestFunction::from_record(q2(), &rec).unwrap(), f);
    }
}
