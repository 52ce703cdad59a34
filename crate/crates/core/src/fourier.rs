//! Fourier transform between S(K) and its spectral side, with multiplier
//! operators.
//!
//! A test function on the window `(a, l)` has a transform supported in Γ^l
//! and constant on cosets of Γ^a. Spectral value arrays are indexed by the
//! frequencies λ ∈ 𝔓^{-l} / 𝔓^{-a} in the order of
//! `enumerate_cosets(-l, -a)`, through χ_λ(x) = χ(λx). The dual Haar
//! measure gives Γ^0 mass one, so each spectral cell weighs q^a.

mod fft;

pub use fft::Direction;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{cell_count, CosetGroup, FieldConfig, FieldElement, Mode};
use crate::testfn::{TestFunction, Window};

/// Serialized form: `{"l": int, "a": int, "values": [[re, im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralFunctionRecord {
    pub l: i64,
    pub a: i64,
    pub values: Vec<[f64; 2]>,
}

/// A function on Γ supported in Γ^l and constant on cosets of Γ^a.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    field: FieldConfig,
    l: i64,
    a: i64,
    values: Vec<Complex64>,
}

/// One spectral coset. `radius` is the exponent with |ξ| = q^radius on the
/// cell, or `None` for the cell Γ^a around the trivial character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralCell {
    pub index: usize,
    pub radius: Option<i64>,
}

impl SpectralFunction {
    pub fn zero(field: FieldConfig, l: i64, a: i64) -> Result<Self> {
        let n = cell_count(field.p(), a, l)?;
        Ok(SpectralFunction { field, l, a, values: vec![Complex64::new(0.0, 0.0); n] })
    }

    pub fn from_values(field: FieldConfig, l: i64, a: i64, values: Vec<Complex64>) -> Result<Self> {
        let n = cell_count(field.p(), a, l)?;
        if values.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: values.len() });
        }
        Ok(SpectralFunction { field, l, a, values })
    }

    pub fn from_record(field: FieldConfig, rec: &SpectralFunctionRecord) -> Result<Self> {
        let values = rec.values.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        Self::from_values(field, rec.l, rec.a, values)
    }

    pub fn to_record(&self) -> SpectralFunctionRecord {
        SpectralFunctionRecord { l: self.l, a: self.a, values: self.values.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    /// Support scale: the function vanishes off Γ^l.
    pub fn support(&self) -> i64 {
        self.l
    }

    /// Resolution scale: constant on cosets of Γ^a.
    pub fn resolution(&self) -> i64 {
        self.a
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// The frequency λ representing cell `idx`.
    pub fn frequency(&self, idx: usize) -> FieldElement {
        self.field.coset_representative(-self.l, -self.a, idx)
    }

    pub fn cell(&self, idx: usize) -> SpectralCell {
        let group = CosetGroup::new(self.field, -self.l, -self.a).expect("window validated at construction");
        SpectralCell { index: idx, radius: group.leading_position(idx).map(|t| self.l - t as i64) }
    }

    pub fn cells(&self) -> impl Iterator<Item = SpectralCell> + '_ {
        let group = CosetGroup::new(self.field, -self.l, -self.a).expect("window validated at construction");
        (0..self.values.len())
            .map(move |idx| SpectralCell { index: idx, radius: group.leading_position(idx).map(|t| self.l - t as i64) })
    }

    /// Value at χ_λ.
    pub fn evaluate(&self, lambda: &FieldElement) -> Complex64 {
        match self.field.coset_index(lambda, -self.l, -self.a) {
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Dual Haar measure of one cell, q^a.
    pub fn cell_measure(&self) -> f64 {
        (self.field.q() as f64).powi(self.a as i32)
    }

    /// (∫ |F|² dξ)^(1/2).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_measure()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn pointwise_product(&self, other: &SpectralFunction) -> Result<Self> {
        if self.field != other.field || self.l != other.l || self.a != other.a {
            return Err(Error::FieldMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(SpectralFunction { field: self.field, l: self.l, a: self.a, values })
    }

    pub fn max_abs_diff(&self, other: &SpectralFunction) -> Result<f64> {
        if self.field != other.field || self.l != other.l || self.a != other.a {
            return Err(Error::FieldMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

/// f̂(ξ) = ∫ f(x) χ̄_ξ(x) dx.
pub fn forward(f: &TestFunction) -> SpectralFunction {
    let field = f.field();
    let Window { a, l } = f.window();
    let (p, n) = (field.p() as usize, f.window().depth());
    let mu = f.cell_measure();
    let values = match field.mode() {
        Mode::Padic => fft::cyclic(f.values(), p, n, Direction::Negative),
        Mode::Laurent => fft::digit_reversal_permute(&fft::vector(f.values(), p, n, Direction::Negative), p, n),
    };
    SpectralFunction { field, l, a, values: values.into_iter().map(|v| v * mu).collect() }
}

/// f(x) = ∫ F(ξ) χ_ξ(x) dξ.
pub fn inverse(spec: &SpectralFunction) -> TestFunction {
    let field = spec.field;
    let (p, n) = (field.p() as usize, (spec.l - spec.a) as u32);
    let mu = spec.cell_measure();
    let values = match field.mode() {
        Mode::Padic => fft::cyclic(&spec.values, p, n, Direction::Positive),
        Mode::Laurent => fft::vector(&fft::digit_reversal_permute(&spec.values, p, n), p, n, Direction::Positive),
    };
    let window = Window { a: spec.a, l: spec.l };
    TestFunction::from_values(field, window, values.into_iter().map(|v| v * mu).collect())
        .expect("spectral and spatial windows have equal cell counts")
}

/// F^{-1}(m · F f). Returning `None` on any cell rejects the multiplier.
pub fn apply_multiplier(f: &TestFunction, m: impl Fn(&SpectralCell) -> Option<Complex64>) -> Result<TestFunction> {
    let fh = forward(f);
    let mut values = Vec::with_capacity(fh.values.len());
    for cell in fh.cells() {
        let factor = m(&cell).ok_or(Error::UndefinedMultiplier(cell.index))?;
        values.push(fh.values[cell.index] * factor);
    }
    Ok(inverse(&SpectralFunction { values, ..fh }))
}

/// Pads f so its support scale is at most 0; then the zero spectral cell
/// lies inside Γ^0 and ⟨ξ⟩ = max(1, |ξ|) is constant on every cell.
pub fn pad_to_unit_resolution(f: &TestFunction) -> Result<TestFunction> {
    let w = f.window();
    if w.a <= 0 {
        return Ok(f.clone());
    }
    f.refine_to(Window { a: 0, l: w.l })
}

/// Exponent e with ⟨ξ⟩ = q^e on the cell; valid when the resolution is ≤ 0.
pub fn bracket_exponent(cell: &SpectralCell) -> i64 {
    cell.radius.map_or(0, |r| r.max(0))
}

fn bracket_multiplier(f: &TestFunction, alpha: f64) -> Result<TestFunction> {
    if !alpha.is_finite() {
        return Err(Error::NegativeOrder(alpha));
    }
    let g = pad_to_unit_resolution(f)?;
    let q = f.field().q() as f64;
    apply_multiplier(&g, |cell| Some(Complex64::new(q.powf(alpha * bracket_exponent(cell) as f64), 0.0)))
}

/// f^{⟨α⟩} = F^{-1}(⟨ξ⟩^α F f). Negative orders are passed to
/// [`p_type_integral`].
pub fn p_type_derivative(f: &TestFunction, alpha: f64) -> Result<TestFunction> {
    if alpha < 0.0 {
        return p_type_integral(f, -alpha);
    }
    bracket_multiplier(f, alpha)
}

/// f_{⟨α⟩} = F^{-1}(⟨ξ⟩^{-α} F f). Negative orders are passed to
/// [`p_type_derivative`].
pub fn p_type_integral(f: &TestFunction, alpha: f64) -> Result<TestFunction> {
    if alpha < 0.0 {
        return p_type_derivative(f, -alpha);
    }
    bracket_multiplier(f, -alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Ball;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(field: FieldConfig, window: Window, rng: &mut ChaCha8Rng) -> TestFunction {
        let n = window.cells(&field).unwrap();
        let v = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        TestFunction::from_values(field, window, v).unwrap()
    }

    fn fields() -> Vec<FieldConfig> {
        let mut out = Vec::new();
        for p in [2, 3, 5] {
            out.push(FieldConfig::padic(p).unwrap());
            out.push(FieldConfig::laurent(p).unwrap());
        }
        out
    }

    #[test]
    fn indicator_of_ideal_transforms_to_dual_ball() {
        for field in fields() {
            for k in -2..=2 {
                let f = TestFunction::from_indicator_combo(field, &[(Complex64::new(1.0, 0.0), Ball::ideal(k))])
                    .unwrap()
                    .refine_to(Window { a: k - 2, l: k + 1 })
                    .unwrap();
                let fh = forward(&f);
                let scale = (field.q() as f64).powi(-k as i32);
                for cell in fh.cells() {
                    let inside = cell.radius.map_or(true, |r| r <= k);
                    let expected = if inside { scale } else { 0.0 };
                    assert!((fh.values()[cell.index] - Complex64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for field in fields() {
            for _ in 0..10 {
                let a = rng.gen_range(-3..=1);
                let w = Window { a, l: a + rng.gen_range(0..=4) };
                let f = random(field, w, &mut rng);
                let fh = forward(&f);
                assert!(inverse(&fh).max_abs_diff(&f).unwrap() < 1e-12);
                let (n1, n2) = (f.lr_norm(2.0).unwrap(), fh.l2_norm());
                assert!((n1 - n2).abs() <= 1e-10 * n1.max(1e-300));
            }
        }
    }

    #[test]
    fn convolution_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for field in fields() {
            let w = Window { a: -1, l: 2 };
            let (f, g) = (random(field, w, &mut rng), random(field, w, &mut rng));
            let lhs = forward(&f.convolve_direct(&g).unwrap());
            let rhs = forward(&f).pointwise_product(&forward(&g)).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
        }
    }

    #[test]
    fn translation_becomes_modulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for field in fields() {
            let w = Window { a: -2, l: 1 };
            let f = random(field, w, &mut rng);
            let h = field.coset_representative(-2, 1, 5 % w.cells(&field).unwrap());
            let g = forward(&f.translate(&h).unwrap());
            let fh = forward(&f);
            for idx in 0..fh.values().len() {
                let lambda = fh.frequency(idx);
                let expected = field.character(&lambda, &h).conj() * fh.values()[idx];
                assert!((g.evaluate(&lambda) - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let field = FieldConfig::padic(3).unwrap();
        let f = random(field, Window { a: -1, l: 2 }, &mut rng);
        let id = apply_multiplier(&f, |_| Some(Complex64::new(1.0, 0.0))).unwrap();
        assert!(id.max_abs_diff(&f).unwrap() < 1e-12);
        let zero = apply_multiplier(&f, |_| Some(Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
        assert_eq!(
            apply_multiplier(&f, |c| (c.index != 4).then_some(Complex64::new(1.0, 0.0))),
            Err(Error::UndefinedMultiplier(4))
        );
    }

    #[test]
    fn p_type_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let field = FieldConfig::laurent(2).unwrap();
        let f = random(field, Window { a: -2, l: 3 }, &mut rng);
        assert!(p_type_derivative(&f, 0.0).unwrap().max_abs_diff(&f).unwrap() < 1e-12);
        let round = p_type_integral(&p_type_derivative(&f, 1.5).unwrap(), 1.5).unwrap();
        assert!(round.max_abs_diff(&f).unwrap() < 1e-11);
        let d = TestFunction::from_indicator_combo(field, &[(Complex64::new(1.0, 0.0), Ball::ideal(0))]).unwrap();
        for alpha in [0.5, 1.0, 3.0] {
            assert!(p_type_derivative(&d, alpha).unwrap().max_abs_diff(&d).unwrap() < 1e-12);
        }
        let back = p_type_derivative(&p_type_derivative(&f, -0.7).unwrap(), 0.7).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-11);
    }

    #[test]
    fn transform_of_zero() {
        let field = FieldConfig::padic(5).unwrap();
        let z = TestFunction::zero(field, Window { a: -1, l: 1 }).unwrap();
        assert_eq!(forward(&z).sup_norm(), 0.0);
        assert_eq!(inverse(&SpectralFunction::zero(field, 1, -1).unwrap()).sup_norm(), 0.0);
    }
}
