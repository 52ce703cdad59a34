//! The truncated singular integral
//!
//! T_k f(x) = ∫_{|y| > q^k} f(x − y) Ω(y) / |y| dy
//!          = Σ_{j ≥ k} q^{-(j+1)} ∫_{|y| = q^{j+1}} f(x − y) Ω(y) dy,
//!
//! and the per-atom operators B f = Σ_j q^{-(j+1)} g_j ∗ f.
//!
//! With x in 𝔓^{a_out} and f supported in 𝔓^{a_f}, every shell with
//! |y| > q^{-min(a_out, a_f)} contributes nothing, and every shell inside
//! 𝔓^{l_f} integrates a constant against a mean-zero kernel, so the sum is
//! finite and exact. Results are returned on the window
//! `(a_out, max(l_out, l_f))`: T_k f commutes with translations and is
//! therefore constant on 𝔓^{l_f} cosets, never on anything coarser in
//! general.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_to_complex, exact_zero, q_pow, ExactComplex, Rational};
use crate::field::{CosetGroup, FieldElement, Sphere};
use crate::fourier;
use crate::kernels::{AngularKernel, Atom};
use crate::testfn::{TestFunction, Window};

/// Truncation level and declared output window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    pub k: i64,
    pub out_a: i64,
    pub out_l: i64,
}

impl TruncationSpec {
    pub fn new(k: i64, out_a: i64, out_l: i64) -> Result<Self> {
        Window::new(out_a, out_l)?;
        Ok(TruncationSpec { k, out_a, out_l })
    }

    /// The window the operators return: `(out_a, max(out_l, l_f))`.
    pub fn result_window(&self, f: &TestFunction) -> Window {
        Window { a: self.out_a, l: self.out_l.max(f.window().l) }
    }

    /// Largest shell index that can reach the output window.
    pub fn j_max(&self, f: &TestFunction) -> i64 {
        -self.out_a.min(f.window().a) - 1
    }

    /// Smallest shell index whose sphere is not inside 𝔓^{l_f}.
    pub fn j_min(&self, f: &TestFunction) -> i64 {
        self.k.max(-f.window().l)
    }

    fn check(&self) -> Result<()> {
        Window::new(self.out_a, self.out_l).map(|_| ())
    }
}

/// g_j = a_ext Φ_{A_j}, stored on the window (s, s + m) with s = −(j+1).
#[derive(Clone, Debug, PartialEq)]
pub struct SphereKernelPiece {
    pub j: i64,
    pub function: TestFunction,
}

impl SphereKernelPiece {
    pub fn new(kernel: &AngularKernel, j: i64) -> Self {
        SphereKernelPiece { j, function: kernel.on_shell(Sphere::new(j).level()) }
    }
}

/// ∫_{A_j} f(x − y) Ω(y) dy as a coset sum at resolution max(l_f, s + m).
pub fn sphere_integral(f: &TestFunction, kernel: &AngularKernel, j: i64, x: &FieldElement) -> Complex64 {
    let field = f.field();
    let s = Sphere::new(j).level();
    let m = kernel.resolution() as i64;
    let r = f.window().l.max(s + m);
    let p = field.p() as usize;
    let n = (p as u128).pow((r - s) as u32) as usize;
    let mu = (field.q() as f64).powi(-r as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in (0..n).filter(|i| i % p != 0) {
        let y = field.coset_representative(s, r, idx);
        let fy = f.evaluate(&field.sub_mod(x, &y, r));
        if fy == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc += fy * kernel.value_at_unit(&y.prime_shift(-s));
    }
    acc * mu
}

/// Σ over shells j_lo ≤ j ≤ j_hi of q^{-(j+1)} Ω_ext Φ_{A_j}, averaged over
/// the cosets of 𝔓^L inside 𝔓^b, exactly.
pub fn averaged_kernel(kernel: &AngularKernel, j_lo: i64, j_hi: i64, window: Window) -> Result<Vec<ExactComplex>> {
    let field = kernel.field();
    let Window { a: b, l: big_l } = window;
    let group = CosetGroup::new(field, b, big_l)?;
    let m = kernel.resolution();
    let q = field.q();
    let averages: Vec<AngularKernel> = (0..=m).map(|t| kernel.conditional_expectation(t)).collect();
    let mut out = vec![exact_zero(); group.size()];
    for (idx, slot) in out.iter_mut().enumerate() {
        let Some(t0) = group.leading_position(idx) else { continue };
        let s = b + t0 as i64;
        let j = -(s + 1);
        if j < j_lo || j > j_hi {
            continue;
        }
        let u = field.coset_representative(b, big_l, idx).prime_shift(-s);
        let depth = ((big_l - s) as u32).min(m);
        let value = &averages[depth as usize].exact_values()[kernel.index_of_unit(&u.truncate(depth as i64))];
        *slot = value * q_pow(q, s);
    }
    Ok(out)
}

fn check_kernel(f: &TestFunction, kernel: &AngularKernel) -> Result<()> {
    if f.field() != kernel.field() {
        return Err(Error::FieldMismatch);
    }
    if !kernel.is_mean_zero() {
        return Err(Error::NotMeanZero);
    }
    Ok(())
}

/// Shells j_lo ≤ j ≤ j_hi of the dyadic sum, on the window (out.a,
/// max(out.l, l_f)).
pub fn apply_shells(
    f: &TestFunction,
    kernel: &AngularKernel,
    j_lo: i64,
    j_hi: i64,
    out: Window,
) -> Result<TestFunction> {
    check_kernel(f, kernel)?;
    let target = Window { a: out.a, l: out.l.max(f.window().l) };
    let work = Window { a: out.a.min(f.window().a), l: target.l };
    let j_hi = j_hi.min(-work.a - 1);
    if j_lo > j_hi {
        return TestFunction::zero(f.field(), target);
    }
    let kbar = averaged_kernel(kernel, j_lo, j_hi, work)?;
    let kbar = TestFunction::from_values(f.field(), work, kbar.iter().map(exact_to_complex).collect())?;
    f.refine_to(work)?.convolve(&kbar)?.restrict(target.a)
}

/// T_k f restricted to 𝔓^{out_a}.
pub fn apply_tk(f: &TestFunction, kernel: &AngularKernel, spec: &TruncationSpec) -> Result<TestFunction> {
    spec.check()?;
    apply_shells(f, kernel, spec.k, spec.j_max(f), Window { a: spec.out_a, l: spec.out_l })
}

/// B f = Σ_j q^{-(j+1)} g_j ∗ f with g_j on the sphere A_j, one
/// convolution per shell.
pub fn apply_b(f: &TestFunction, atom: &Atom, spec: &TruncationSpec) -> Result<TestFunction> {
    spec.check()?;
    let kernel = atom.kernel();
    if f.field() != kernel.field() {
        return Err(Error::FieldMismatch);
    }
    let target = spec.result_window(f);
    let mut acc = TestFunction::zero(f.field(), target)?;
    for j in spec.j_min(f)..=spec.j_max(f) {
        let piece = SphereKernelPiece::new(kernel, j);
        let weight = (f.field().q() as f64).powi(-(j as i32 + 1));
        let conv = piece.function.convolve(f)?.scale(Complex64::new(weight, 0.0));
        acc = acc.add(&conv.with_window(target)?)?;
    }
    Ok(acc)
}

/// The literal per-atom operator in which a Φ_{A_j} is read with a
/// supported in 𝔇*: only the j = −1 shell survives, so B f = a ∗ f when
/// k ≤ −1 and 0 otherwise.
pub fn apply_b_literal(f: &TestFunction, atom: &Atom, spec: &TruncationSpec) -> Result<TestFunction> {
    spec.check()?;
    let kernel = atom.kernel();
    if f.field() != kernel.field() {
        return Err(Error::FieldMismatch);
    }
    let target = spec.result_window(f);
    if spec.k > -1 {
        return TestFunction::zero(f.field(), target);
    }
    kernel.on_shell(0).convolve(f)?.with_window(target)
}

/// max_ξ |ĝ_j(ξ)| under both readings of g_j.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhatBounds {
    pub j: i64,
    /// g_j = a_ext Φ_{A_j}.
    pub reading_a: f64,
    /// g_j = a Φ_{A_j} with a supported in 𝔇*, nonzero only for j = −1.
    pub reading_b: f64,
}

pub fn ghat_sup_bound(atom: &Atom, j: i64) -> GhatBounds {
    let kernel = atom.kernel();
    let reading_a = fourier::forward(&SphereKernelPiece::new(kernel, j).function).sup_norm();
    let reading_b = if j == -1 { fourier::forward(&kernel.on_shell(0)).sup_norm() } else { 0.0 };
    GhatBounds { j, reading_a, reading_b }
}

/// ∫ g_j, exactly.
pub fn piece_integral(kernel: &AngularKernel, j: i64) -> ExactComplex {
    let scale: Rational = q_pow(kernel.field().q(), j + 1);
    let z = kernel.integral();
    if z.re.is_zero() && z.im.is_zero() {
        return exact_zero();
    }
    z * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Ball, FieldConfig};
    use crate::kernels::atomic_decompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random(field: FieldConfig, window: Window, rng: &mut ChaCha8Rng) -> TestFunction {
        let n = window.cells(&field).unwrap();
        TestFunction::from_values(field, window, (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect())
            .unwrap()
    }

    fn random_kernel(field: FieldConfig, m: u32, rng: &mut ChaCha8Rng) -> AngularKernel {
        let n = crate::kernels::unit_cells(&field, m).unwrap();
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        AngularKernel::new(field, m, &v).unwrap().mean_zero_project()
    }

    fn pointwise_tk(f: &TestFunction, kernel: &AngularKernel, spec: &TruncationSpec, x: &FieldElement) -> Complex64 {
        (spec.k..=spec.j_max(f))
            .map(|j| sphere_integral(f, kernel, j, x) * (f.field().q() as f64).powi(-(j as i32 + 1)))
            .sum()
    }

    #[test]
    fn zero_kernel_gives_zero() {
        let field = FieldConfig::padic(2).unwrap();
        let f = TestFunction::from_indicator_combo(field, &[(c(1.0), Ball::ideal(0))]).unwrap();
        let z = AngularKernel::zero(field, 2).unwrap();
        let out = apply_tk(&f, &z, &TruncationSpec::new(-3, -3, 2).unwrap()).unwrap();
        assert_eq!(out.sup_norm(), 0.0);
        assert_eq!(sphere_integral(&f, &z, 0, &FieldElement::zero()), c(0.0));
    }

    #[test]
    fn tk_matches_shell_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for field in [FieldConfig::padic(2).unwrap(), FieldConfig::laurent(3).unwrap()] {
            let f = random(field, Window { a: -2, l: 1 }, &mut rng);
            let kernel = random_kernel(field, 2, &mut rng);
            let spec = TruncationSpec::new(-2, -1, 2).unwrap();
            let out = apply_tk(&f, &kernel, &spec).unwrap();
            assert_eq!(out.window(), Window { a: -1, l: 2 });
            for idx in 0..out.values().len() {
                let x = field.coset_representative(-1, 2, idx);
                let expected = pointwise_tk(&f, &kernel, &spec, &x);
                assert!((out.values()[idx] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn splitting_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let field = FieldConfig::padic(3).unwrap();
        let kernel = random_kernel(field, 2, &mut rng);
        let f = random(field, Window { a: -1, l: 1 }, &mut rng);
        let spec = TruncationSpec::new(-2, -2, 1).unwrap();
        let direct = apply_tk(&f, &kernel, &spec).unwrap();
        let dec = atomic_decompose(&kernel).unwrap();
        let mut sum = TestFunction::zero(field, spec.result_window(&f)).unwrap();
        for (lambda, atom) in &dec.terms {
            sum = sum.add(&apply_b(&f, atom, &spec).unwrap().scale(c(*lambda))).unwrap();
        }
        assert!(sum.max_abs_diff(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn mean_zero_annihilates_constants() {
        let field = FieldConfig::laurent(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kernel = random_kernel(field, 3, &mut rng);
        let f = TestFunction::from_indicator_combo(field, &[(c(1.0), Ball::ideal(-4))]).unwrap();
        let out = apply_shells(&f, &kernel, -1, 2, Window { a: -1, l: 1 }).unwrap();
        assert!(out.sup_norm() < 1e-12);
    }

    #[test]
    fn ghat_readings_coincide_on_unit_sphere() {
        let field = FieldConfig::padic(2).unwrap();
        let atom = Atom::new(AngularKernel::new(field, 2, &[c(2.0), c(-2.0)]).unwrap()).unwrap();
        let g = ghat_sup_bound(&atom, -1);
        assert!((g.reading_a - g.reading_b).abs() < 1e-15);
        assert!(g.reading_b <= 1.0 + 1e-15);
        let g0 = ghat_sup_bound(&atom, 0);
        assert!((g0.reading_a - 2.0 * g.reading_a).abs() < 1e-12);
        assert_eq!(g0.reading_b, 0.0);
    }

    #[test]
    fn pieces_are_mean_zero_on_their_sphere() {
        let field = FieldConfig::padic(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let kernel = random_kernel(field, 2, &mut rng);
        for j in -2..=2 {
            let piece = SphereKernelPiece::new(&kernel, j);
            assert!(piece.function.integral().norm() < 1e-12);
            assert!(piece_integral(&kernel, j).re.is_zero());
        }
    }
}
