//! Brute-force reference implementations.
//!
//! Everything here is computed from field arithmetic, coset enumeration,
//! point evaluation and the character alone: no index groups, no fast
//! transforms, no averaged kernels. These are slow on purpose and serve as
//! independent references for the library's fast paths.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{FieldConfig, FieldElement};
use crate::fourier::SpectralFunction;
use crate::kernels::AngularKernel;
use crate::testfn::{TestFunction, Window};

/// f̂(λ) = q^{-l} Σ_h f(h) conj χ(λ h) over coset representatives.
pub fn fourier_forward(f: &TestFunction) -> Result<SpectralFunction> {
    let field = f.field();
    let Window { a, l } = f.window();
    let xs = field.enumerate_cosets(a, l)?;
    let freqs = field.enumerate_cosets(-l, -a)?;
    let mu = f.cell_measure();
    let values = freqs
        .iter()
        .map(|lambda| xs.iter().map(|h| f.evaluate(h) * field.character(lambda, h).conj()).sum::<Complex64>() * mu)
        .collect();
    SpectralFunction::from_values(field, l, a, values)
}

/// f(h) = q^{a} Σ_λ F(λ) χ(λ h).
pub fn fourier_inverse(spec: &SpectralFunction) -> Result<TestFunction> {
    let field = spec.field();
    let (l, a) = (spec.support(), spec.resolution());
    let xs = field.enumerate_cosets(a, l)?;
    let freqs = field.enumerate_cosets(-l, -a)?;
    let mu = spec.cell_measure();
    let values = xs
        .iter()
        .map(|h| freqs.iter().map(|lambda| spec.evaluate(lambda) * field.character(lambda, h)).sum::<Complex64>() * mu)
        .collect();
    TestFunction::from_values(field, Window { a, l }, values)
}

/// (f ∗ g)(x) = Σ_y f(x − y) g(y) q^{-l} at the common refinement.
pub fn convolve(f: &TestFunction, g: &TestFunction) -> Result<TestFunction> {
    let field = f.field();
    let w = f.window().hull(&g.window());
    let reps = field.enumerate_cosets(w.a, w.l)?;
    let mu = (field.q() as f64).powi(-w.l as i32);
    let values = reps
        .iter()
        .map(|x| reps.iter().map(|y| f.evaluate(&field.sub_mod(x, y, w.l)) * g.evaluate(y)).sum::<Complex64>() * mu)
        .collect();
    TestFunction::from_values(field, w, values)
}

/// ∫_{|y| = q^{j+1}} f(x − y) Ω(y) dy, summing over the sphere cosets of
/// 𝔓^r with r large enough that both factors are constant on them.
pub fn sphere_integral(f: &TestFunction, kernel: &AngularKernel, j: i64, x: &FieldElement, r: i64) -> Complex64 {
    let field = f.field();
    let s = -(j + 1);
    let r = r.max(s + kernel.resolution() as i64).max(f.window().l);
    let mu = (field.q() as f64).powi(-r as i32);
    let ys = field.enumerate_cosets(s, r).expect("sphere grid fits the cell cap");
    ys.iter()
        .filter(|y| y.valuation() == Some(s))
        .map(|y| f.evaluate(&field.sub_mod(x, y, r)) * kernel.evaluate_homogeneous(y).expect("y is nonzero"))
        .sum::<Complex64>()
        * mu
}

/// T_k f(x) = Σ_{j ≥ k} q^{-(j+1)} ∫_{A_j} f(x − y) Ω(y) dy on the window
/// (out.a, max(out.l, l_f)).
///
/// The shell sum runs two shells past the point where the ultrametric
/// support argument makes every term vanish, so a wrong cutoff would show.
pub fn truncated_operator(f: &TestFunction, kernel: &AngularKernel, k: i64, out: Window) -> Result<TestFunction> {
    let field = f.field();
    let target = Window { a: out.a, l: out.l.max(f.window().l) };
    let j_end = -out.a.min(f.window().a) + 1;
    let q = field.q() as f64;
    let xs = field.enumerate_cosets(target.a, target.l)?;
    let values = xs
        .iter()
        .map(|x| {
            (k..=j_end).map(|j| q.powi(-(j as i32) - 1) * sphere_integral(f, kernel, j, x, target.l)).sum::<Complex64>()
        })
        .collect();
    TestFunction::from_values(field, target, values)
}

/// The literal per-atom operator: (a ∗ f)(x) over 𝔇* when k ≤ −1, else 0.
pub fn literal_b(f: &TestFunction, atom: &AngularKernel, k: i64, out: Window) -> Result<TestFunction> {
    let field = f.field();
    let target = Window { a: out.a, l: out.l.max(f.window().l) };
    let xs = field.enumerate_cosets(target.a, target.l)?;
    let values = xs
        .iter()
        .map(|x| if k <= -1 { sphere_integral(f, atom, -1, x, target.l) } else { Complex64::new(0.0, 0.0) })
        .collect();
    TestFunction::from_values(field, target, values)
}

/// max over unit cells y of Σ_{j=1}^{J} Σ_x q^{-m} |Ω(x + 𝔭^j y) − Ω(x)|,
/// with every shift formed by field addition and every j up to J summed.
pub fn taibleson_modulus(kernel: &AngularKernel, big_j: u32) -> f64 {
    let field = kernel.field();
    let m = kernel.resolution() as i64;
    let units = unit_representatives(&field, m);
    let mu = (field.q() as f64).powi(-m as i32);
    units
        .iter()
        .map(|y| {
            (1..=big_j as i64)
                .map(|j| {
                    let shifted = y.prime_shift(j);
                    units
                        .iter()
                        .map(|x| {
                            let moved = field.add(x, &shifted);
                            (kernel.evaluate_homogeneous(&moved).unwrap() - kernel.evaluate_homogeneous(x).unwrap())
                                .norm()
                        })
                        .sum::<f64>()
                        * mu
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn unit_representatives(field: &FieldConfig, m: i64) -> Vec<FieldElement> {
    field
        .enumerate_cosets(0, m)
        .expect("kernel grid fits the cell cap")
        .into_iter()
        .filter(|x| x.valuation() == Some(0))
        .collect()
}

/// F^{-1}(m F f) through the naive transforms; `m` sees each frequency λ.
pub fn multiplier(f: &TestFunction, m: impl Fn(&FieldElement) -> Complex64) -> Result<TestFunction> {
    let fh = fourier_forward(f)?;
    let field = f.field();
    let freqs = field.enumerate_cosets(-fh.support(), -fh.resolution())?;
    let values = freqs.iter().map(|lambda| fh.evaluate(lambda) * m(lambda)).collect();
    fourier_inverse(&SpectralFunction::from_values(field, fh.support(), fh.resolution(), values)?)
}

/// Δ_j f via the naive transforms, on the window (min(a, 0), l).
pub fn littlewood_paley(f: &TestFunction, j: i64) -> Result<TestFunction> {
    let w = f.window();
    let g = f.refine_to(Window { a: w.a.min(0), l: w.l })?;
    let resolution = -g.window().a;
    multiplier(&g, |lambda| {
        // |ξ| = q^{-v(λ)}; the zero frequency and anything in 𝔓^{-a} sit in Γ^0.
        let radius = match lambda.valuation() {
            Some(v) if v < resolution => -v,
            _ => i64::MIN,
        };
        let inside = if j == 0 { radius <= 0 } else { radius == j };
        Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
    })
}

/// Besov norm from naive blocks and a direct coset sum for each L^r norm.
pub fn besov_norm(f: &TestFunction, s: f64, r: f64, t: f64) -> Result<f64> {
    let q = f.field().q() as f64;
    let mut acc = 0.0;
    for j in 0..=f.window().l.max(0) {
        let b = littlewood_paley(f, j)?;
        let mu = b.cell_measure();
        let lr = (b.values().iter().map(|v| v.norm().powf(r)).sum::<f64>() * mu).powf(1.0 / r);
        acc += q.powf(s * j as f64 * t) * lr.powf(t);
    }
    Ok(acc.powf(1.0 / t))
}

/// Triebel–Lizorkin norm from naive blocks, aggregated pointwise.
pub fn triebel_lizorkin_norm(f: &TestFunction, s: f64, r: f64, t: f64) -> Result<f64> {
    let q = f.field().q() as f64;
    let blocks = (0..=f.window().l.max(0)).map(|j| littlewood_paley(f, j)).collect::<Result<Vec<_>>>()?;
    let mu = blocks[0].cell_measure();
    let n = blocks[0].values().len();
    let mut total = 0.0;
    for i in 0..n {
        let inner: f64 =
            blocks.iter().enumerate().map(|(j, b)| q.powf(s * j as f64 * t) * b.values()[i].norm().powf(t)).sum();
        total += inner.powf(r / t);
    }
    Ok((total * mu).powf(1.0 / r))
}
