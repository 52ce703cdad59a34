//! Calderón–Zygmund decomposition, Littlewood–Paley blocks, and Besov /
//! Triebel–Lizorkin norms.

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{nonnegative_reals, q_pow, rational_from_f64, rational_to_f64, Rational};
use crate::field::{Ball, FieldConfig};
use crate::fourier::{self, SpectralFunction};
use crate::testfn::{TestFunction, Window};

/// f = f1 + f2 at level λ over the disjoint balls W_i.
///
/// The exact parts live on `window`; `bad_part` and `good_part` are their
/// float images for downstream operators.
#[derive(Clone, Debug, PartialEq)]
pub struct CZDecomposition {
    pub field: FieldConfig,
    pub lambda: f64,
    pub start_scale: i64,
    pub window: Window,
    pub balls: Vec<Ball>,
    pub exceptional_measure: Rational,
    pub f_exact: Vec<Rational>,
    pub f1_exact: Vec<Rational>,
    pub f2_exact: Vec<Rational>,
    pub bad_part: TestFunction,
    pub good_part: TestFunction,
}

/// The level-sum tree: `sums[t - a][c]` is the sum of the cell values over
/// the coset with index c of 𝔓^t in 𝔓^a.
fn level_sums(values: &[Rational], p: usize, depth: u32) -> Vec<Vec<Rational>> {
    let mut sums = vec![values.to_vec()];
    for t in (0..depth).rev() {
        let width = p.pow(t);
        let finer = sums.last().unwrap();
        let coarse = (0..width).map(|c| (0..p).fold(Rational::zero(), |acc, d| acc + &finer[c + d * width])).collect();
        sums.push(coarse);
    }
    sums.reverse();
    sums
}

/// Largest S ≤ a with q^S ‖f‖₁ ≤ λ: the smallest ball around supp f whose
/// average does not exceed λ.
pub fn suggest_start_scale(f: &TestFunction, lambda: f64) -> Result<i64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLevel(lambda));
    }
    let vals = nonnegative_reals(f.values())?;
    let total = vals.iter().fold(Rational::zero(), |acc, v| acc + v) * f.cell_measure_exact();
    let lam = rational_from_f64(lambda)?;
    let q = f.field().q();
    let mut s = f.window().a;
    if total.is_zero() {
        return Ok(s);
    }
    while q_pow(q, s) * &total > lam {
        s -= 1;
    }
    Ok(s)
}

/// Stopping-time decomposition on the q-ary coset tree, from 𝔓^start_scale
/// down to the resolution of f.
pub fn cz_decompose(f: &TestFunction, lambda: f64, start_scale: i64) -> Result<CZDecomposition> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLevel(lambda));
    }
    let field = f.field();
    let q = field.q();
    let p = field.p() as usize;
    let Window { a, l } = f.window();
    let lam = rational_from_f64(lambda)?;
    let values = nonnegative_reals(f.values())?;
    let sums = level_sums(&values, p, (l - a) as u32);
    let average = |t: i64, c: usize| -> Rational {
        if t <= a {
            &sums[0][0] * q_pow(q, t - l)
        } else {
            &sums[(t - a) as usize][c] * q_pow(q, t - l)
        }
    };
    let too_small =
        |t: i64, avg: &Rational| Error::StartScaleTooSmall { scale: t, average: rational_to_f64(avg), lambda };

    // (scale, coset index within 𝔓^a at that scale)
    let mut selected: Vec<(i64, usize)> = Vec::new();
    let mut active: Vec<usize>;
    let mut level;
    if start_scale <= a {
        let top = average(start_scale, 0);
        if top > lam {
            return Err(too_small(start_scale, &top));
        }
        level = start_scale;
        active = vec![0];
        while level < a && !active.is_empty() {
            level += 1;
            if average(level, 0) > lam {
                selected.push((level, 0));
                active.clear();
            }
        }
    } else {
        level = start_scale.min(l);
        let width = p.pow((level - a) as u32);
        active = (0..width).collect();
        for &c in &active {
            let avg = average(level, c);
            if avg > lam {
                return Err(too_small(start_scale, &avg));
            }
        }
    }
    while level < l && !active.is_empty() {
        let width = p.pow((level - a) as u32);
        level += 1;
        let mut next = Vec::new();
        for &c in &active {
            for d in 0..p {
                let child = c + d * width;
                if average(level, child) > lam {
                    selected.push((level, child));
                } else {
                    next.push(child);
                }
            }
        }
        active = next;
    }

    let a2 = selected.iter().map(|&(t, _)| t).min().unwrap_or(a).min(a);
    let window = Window { a: a2, l };
    let f_exact = refine_exact(&values, p, (a - a2) as u32);
    let mut f2_exact = f_exact.clone();
    let mut balls = Vec::with_capacity(selected.len());
    let mut exceptional_measure = Rational::zero();
    for &(t, c) in &selected {
        let center = if t <= a { crate::field::FieldElement::zero() } else { field.coset_representative(a, t, c) };
        let ball = Ball::new(center, t);
        let avg = average(t, c);
        for i in cells_of(&field, window, &ball) {
            f2_exact[i] = avg.clone();
        }
        exceptional_measure += ball.measure(&field);
        balls.push(ball);
    }
    let f1_exact: Vec<Rational> = f_exact.iter().zip(&f2_exact).map(|(x, y)| x - y).collect();
    let to_fn = |v: &[Rational]| {
        TestFunction::from_values(field, window, v.iter().map(|x| Complex64::new(rational_to_f64(x), 0.0)).collect())
    };
    Ok(CZDecomposition {
        field,
        lambda,
        start_scale,
        window,
        balls,
        exceptional_measure,
        bad_part: to_fn(&f1_exact)?,
        good_part: to_fn(&f2_exact)?,
        f_exact,
        f1_exact,
        f2_exact,
    })
}

/// Pads exact values from (a, l) to (a - shift, l).
fn refine_exact(values: &[Rational], p: usize, shift: u32) -> Vec<Rational> {
    if shift == 0 {
        return values.to_vec();
    }
    let low = p.pow(shift);
    let mut out = vec![Rational::zero(); values.len() * low];
    for (i, v) in values.iter().enumerate() {
        out[i * low] = v.clone();
    }
    out
}

/// Indices of the window cells inside a ball of scale ≤ l.
fn cells_of(field: &FieldConfig, window: Window, ball: &Ball) -> Vec<usize> {
    let p = field.p() as usize;
    let n = window.cells(field).expect("window already validated");
    if ball.scale() <= window.a {
        return (0..n).collect();
    }
    let width = p.pow((ball.scale() - window.a) as u32);
    let c = field.coset_index(ball.center(), window.a, ball.scale()).expect("ball inside window");
    (c..n).step_by(width).collect()
}

/// One exactly checked clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub holds: bool,
}

/// Clause-by-clause check of a decomposition, all in exact arithmetic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CZReport {
    /// The lemma's clauses, plus disjointness and f = f1 + f2.
    pub clauses: Vec<Clause>,
    /// ‖f2‖_∞ ≤ qλ and ‖f2‖₂² ≤ λq‖f‖₁.
    pub remark_bounds: Vec<Clause>,
    /// ‖f1‖₁ ≤ ‖f‖₁; reported, since the construction only guarantees 2‖f‖₁.
    pub f1_l1_within_f: bool,
    pub f_l1: f64,
    pub f1_l1: f64,
    pub f2_l1: f64,
    /// ‖f2‖₁ = ‖f‖₁, exactly.
    pub f2_l1_equals_f: bool,
}

impl CZReport {
    pub fn exact_pass(&self) -> bool {
        self.clauses.iter().chain(&self.remark_bounds).all(|c| c.holds)
    }
}

impl CZDecomposition {
    pub fn check(&self) -> CZReport {
        let field = self.field;
        let q = Rational::from_integer(field.q().into());
        let lam = rational_from_f64(self.lambda).expect("lambda is finite");
        let mu = q_pow(field.q(), -self.window.l);
        let n = self.f_exact.len();
        let mut in_d = vec![false; n];
        for ball in &self.balls {
            for i in cells_of(&field, self.window, ball) {
                in_d[i] = true;
            }
        }
        let l1 = |v: &[Rational]| v.iter().fold(Rational::zero(), |acc, x| acc + x.abs()) * &mu;
        let (f_l1, f1_l1, f2_l1) = (l1(&self.f_exact), l1(&self.f1_exact), l1(&self.f2_exact));
        let off = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| !in_d[i]).all(pred);
        let on = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| in_d[i]).all(pred);
        let disjoint =
            self.balls.iter().enumerate().all(|(i, b)| {
                self.balls[i + 1..].iter().all(|c| b.relation(c) == crate::field::BallRelation::Disjoint)
            });
        // Vacuous when no ball is selected (including f = 0).
        let measure_bound = self.balls.is_empty() || self.exceptional_measure < &f_l1 / &lam;
        let mean_zero = self.balls.iter().all(|b| {
            cells_of(&field, self.window, b).iter().fold(Rational::zero(), |acc, &i| acc + &self.f1_exact[i]).is_zero()
        });
        let qlam = &q * &lam;
        let clause = |name: &str, holds: bool| Clause { name: name.to_string(), holds };
        let clauses = vec![
            clause("balls pairwise disjoint", disjoint),
            clause("(i) sum |W_i| < |f|_1 / lambda", measure_bound),
            clause("(ii) |f| <= lambda off D", off(&|i| self.f_exact[i] <= lam)),
            clause("(iii) |f2| <= q lambda on D", on(&|i| self.f2_exact[i].abs() <= qlam)),
            clause("(iv) f2 = f off D", off(&|i| self.f2_exact[i] == self.f_exact[i])),
            clause("(v) f1 = 0 off D", off(&|i| self.f1_exact[i].is_zero())),
            clause("(vi) integral of f1 over each W_i is 0", mean_zero),
            clause("f = f1 + f2", (0..n).all(|i| &self.f1_exact[i] + &self.f2_exact[i] == self.f_exact[i])),
        ];
        let f2_sup = self.f2_exact.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero);
        let f2_l2_sqr = self.f2_exact.iter().fold(Rational::zero(), |acc, x| acc + x * x) * &mu;
        let remark_bounds = vec![
            clause("|f2|_inf <= q lambda", f2_sup <= qlam),
            clause("|f2|_2^2 <= lambda q |f|_1", f2_l2_sqr <= &qlam * &f_l1),
        ];
        CZReport {
            clauses,
            remark_bounds,
            f1_l1_within_f: f1_l1 <= f_l1,
            f_l1: rational_to_f64(&f_l1),
            f1_l1: rational_to_f64(&f1_l1),
            f2_l1: rational_to_f64(&f2_l1),
            f2_l1_equals_f: f2_l1 == f_l1,
        }
    }
}

/// Δ_j f.
#[derive(Clone, Debug, PartialEq)]
pub struct LPBlock {
    pub j: i64,
    pub block: TestFunction,
}

/// φ_j on a spectral cell: Φ_{Γ^0} for j = 0, Φ_{Γ^j ∖ Γ^{j−1}} for j ≥ 1.
fn phi(j: i64, radius: Option<i64>) -> bool {
    match radius {
        None => j == 0,
        Some(r) => (j == 0 && r <= 0) || (j >= 1 && r == j),
    }
}

/// Highest block index that can be nonzero for f.
pub fn top_block(f: &TestFunction) -> i64 {
    f.window().l.max(0)
}

pub fn littlewood_paley(f: &TestFunction, j: i64) -> Result<LPBlock> {
    if j < 0 {
        return Err(Error::NegativeBlockIndex(j));
    }
    let g = fourier::pad_to_unit_resolution(f)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let block = fourier::apply_multiplier(&g, |cell| Some(if phi(j, cell.radius) { one } else { zero }))?;
    Ok(LPBlock { j, block })
}

/// Δ_0 f, …, Δ_{top} f from one forward transform, all on the same window.
pub fn lp_blocks(f: &TestFunction) -> Result<Vec<LPBlock>> {
    let g = fourier::pad_to_unit_resolution(f)?;
    let fh = fourier::forward(&g);
    let zero = Complex64::new(0.0, 0.0);
    (0..=top_block(f))
        .map(|j| {
            let values = fh.cells().map(|c| if phi(j, c.radius) { fh.values()[c.index] } else { zero }).collect();
            let spec = SpectralFunction::from_values(fh.field(), fh.support(), fh.resolution(), values)?;
            Ok(LPBlock { j, block: fourier::inverse(&spec) })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "B")]
    Besov,
    #[serde(rename = "F")]
    TriebelLizorkin,
    #[serde(rename = "L")]
    Lebesgue,
}

/// Serialized as `{"space": "B"|"F"|"L", "s", "r", "t", "value"}`. For
/// Lebesgue norms s = 0 and t = r.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub space: Space,
    pub s: f64,
    pub r: f64,
    pub t: f64,
    pub value: f64,
}

fn check_exponents(r: f64, t: f64) -> Result<()> {
    if !(r >= 1.0) || r.is_infinite() {
        return Err(Error::InvalidExponent(r));
    }
    if !(t >= 1.0) || t.is_infinite() {
        return Err(Error::InvalidExponent(t));
    }
    Ok(())
}

pub fn besov_from_blocks(blocks: &[LPBlock], q: u32, s: f64, r: f64, t: f64) -> Result<f64> {
    check_exponents(r, t)?;
    let mut acc = 0.0;
    for b in blocks {
        acc += (q as f64).powf(s * b.j as f64 * t) * b.block.lr_norm(r)?.powf(t);
    }
    Ok(acc.powf(1.0 / t))
}

pub fn triebel_lizorkin_from_blocks(blocks: &[LPBlock], q: u32, s: f64, r: f64, t: f64) -> Result<f64> {
    check_exponents(r, t)?;
    let Some(first) = blocks.first() else { return Ok(0.0) };
    let n = first.block.values().len();
    let mu = first.block.cell_measure();
    let mut total = 0.0;
    for i in 0..n {
        let inner: f64 =
            blocks.iter().map(|b| (q as f64).powf(s * b.j as f64 * t) * b.block.values()[i].norm().powf(t)).sum();
        total += inner.powf(r / t);
    }
    Ok((total * mu).powf(1.0 / r))
}

pub fn besov_norm(f: &TestFunction, s: f64, r: f64, t: f64) -> Result<NormReport> {
    check_exponents(r, t)?;
    let value = besov_from_blocks(&lp_blocks(f)?, f.field().q(), s, r, t)?;
    Ok(NormReport { space: Space::Besov, s, r, t, value })
}

pub fn triebel_lizorkin_norm(f: &TestFunction, s: f64, r: f64, t: f64) -> Result<NormReport> {
    check_exponents(r, t)?;
    let value = triebel_lizorkin_from_blocks(&lp_blocks(f)?, f.field().q(), s, r, t)?;
    Ok(NormReport { space: Space::TriebelLizorkin, s, r, t, value })
}

pub fn lebesgue_norm(f: &TestFunction, r: f64) -> Result<NormReport> {
    Ok(NormReport { space: Space::Lebesgue, s: 0.0, r, t: r, value: f.lr_norm(r)? })
}

/// One row of the condition (iii) sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnityRow {
    pub j: i64,
    /// sup_x |(φ̌_j)^{⟨s⟩}(x)|.
    pub sup: f64,
    /// sup / q^{-j+js}.
    pub c_stated: f64,
    /// sup / q^{j+js}.
    pub c_rescaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnityReport {
    pub s: f64,
    /// Condition (i): every φ_j vanishes off its annulus.
    pub supports_ok: bool,
    /// Condition (ii): Σ_j φ_j = 1 on every spectral cell.
    pub partition_ok: bool,
    pub rows: Vec<UnityRow>,
}

/// Checks the partition of unity {φ_j} on the spectral window dual to
/// `window` and measures condition (iii).
pub fn verify_unity_decomposition(field: FieldConfig, window: Window, s: f64) -> Result<UnityReport> {
    if !(s > 0.0) {
        return Err(Error::NegativeOrder(s));
    }
    let w = Window { a: window.a.min(0), l: window.l.max(0) };
    let grid = SpectralFunction::zero(field, w.l, w.a)?;
    let q = field.q() as f64;
    let mut supports_ok = true;
    let mut partition_ok = true;
    for cell in grid.cells() {
        let mut count = 0u32;
        for j in 0..=w.l {
            if !phi(j, cell.radius) {
                continue;
            }
            count += 1;
            // |ξ| on the cell: q^radius, or at most q^a ≤ 1 on the zero cell.
            let inside = match (j, cell.radius) {
                (0, None) => true,
                (0, Some(r)) => r < 1,
                (_, Some(r)) => j - 1 < r && r < j + 1,
                (_, None) => false,
            };
            supports_ok &= inside;
        }
        partition_ok &= count == 1;
    }
    let mut rows = Vec::new();
    for j in 0..=w.l {
        let values = grid.cells().map(|c| Complex64::new(if phi(j, c.radius) { 1.0 } else { 0.0 }, 0.0)).collect();
        let phi_j = SpectralFunction::from_values(field, w.l, w.a, values)?;
        let check = fourier::inverse(&phi_j);
        let sup = fourier::p_type_derivative(&check, s)?.sup_norm();
        let jf = j as f64;
        rows.push(UnityRow { j, sup, c_stated: sup / q.powf(-jf + jf * s), c_rescaled: sup / q.powf(jf + jf * s) });
    }
    Ok(UnityReport { s, supports_ok, partition_ok, rows })
}

/// sup |(φ̌_j)^{⟨s⟩}| in closed form: 1 for j = 0, q^{js} q^j (1 − 1/q)
/// otherwise.
pub fn unity_sup_closed_form(q: u32, j: i64, s: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let q = q as f64;
    q.powf(j as f64 * s) * q.powi(j as i32) * (1.0 - 1.0 / q)
}
