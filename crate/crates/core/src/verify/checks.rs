use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use super::report::{CheckKind, CheckRecord, TableRow};
use super::{CheckGroup, Corpus, HarnessConfig, Srt};
use crate::decomp::{
    besov_from_blocks, cz_decompose, lp_blocks, suggest_start_scale, triebel_lizorkin_from_blocks,
    unity_sup_closed_form, verify_unity_decomposition, LPBlock,
};
use crate::error::Result;
use crate::exact::{exact_to_complex, rational_to_f64, ExactComplex, Rational};
use crate::field::Ball;
use crate::fourier;
use crate::kernels::{atomic_decompose, taibleson_modulus, validate_atom, Atom, AtomicDecomposition};
use crate::operators::{apply_b, apply_b_literal, apply_shells, apply_tk, SphereKernelPiece, TruncationSpec};
use crate::oracle;
use crate::testfn::{TestFunction, Window};

/// Above this many cells the naive transform is skipped in the corpus sweep.
const NAIVE_CELLS: usize = 1024;
const WEAK_FIXTURE_LEVEL: f64 = 0.3;

#[derive(Default)]
pub(super) struct GroupOutput {
    pub checks: Vec<CheckRecord>,
    pub tables: BTreeMap<String, Vec<TableRow>>,
}

impl GroupOutput {
    fn push(&mut self, c: CheckRecord) {
        self.checks.push(c);
    }

    fn table(&mut self, name: &str, rows: Vec<TableRow>) {
        self.tables.insert(name.to_string(), rows);
    }
}

fn row(function_id: String, k: i64, param: String, ratio: f64) -> TableRow {
    TableRow { function_id, k, param, ratio }
}

/// |a − b| / max(|a|, |b|), and 0 when both vanish.
fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// max/min of a nonnegative family; 1 when all vanish, f64::MAX when only
/// the minimum does.
fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || values.is_empty() {
        1.0
    } else if min == 0.0 {
        f64::MAX
    } else {
        max / min
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub(super) struct Context<'a> {
    config: &'a HarnessConfig,
    corpus: &'a Corpus,
    decompositions: Vec<AtomicDecomposition>,
    tk: OnceLock<Result<Vec<TestFunction>>>,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a HarnessConfig, corpus: &'a Corpus) -> Result<Self> {
        let decompositions = corpus.kernels.iter().map(atomic_decompose).collect::<Result<_>>()?;
        Ok(Context { config, corpus, decompositions, tk: OnceLock::new() })
    }

    pub fn run_group(&self, g: CheckGroup) -> Result<GroupOutput> {
        match g {
            CheckGroup::Fourier => self.fourier(),
            CheckGroup::Discretization => self.discretization(),
            CheckGroup::Atoms => self.atoms(),
            CheckGroup::Cz => self.cz(),
            CheckGroup::Lp => self.lp(),
            CheckGroup::Lebesgue => self.lebesgue(),
            CheckGroup::BesovTl => self.besov_tl(),
            CheckGroup::ProofConstants => self.proof_constants(),
            CheckGroup::Taibleson => self.taibleson(),
            CheckGroup::Unity => self.unity(),
        }
    }

    fn window(&self) -> Window {
        self.config.corpus.window
    }

    fn spec(&self, k: i64) -> TruncationSpec {
        TruncationSpec { k, out_a: self.window().a, out_l: self.window().l }
    }

    fn q(&self) -> f64 {
        self.corpus.field.q() as f64
    }

    fn id(&self, f: usize, kernel: usize) -> String {
        format!("{}@{}", self.corpus.function_ids[f], self.corpus.kernel_ids[kernel])
    }

    fn atom_id(&self, kernel: usize, atom: usize) -> String {
        format!("{}#{}", self.corpus.kernel_ids[kernel], atom)
    }

    fn sample(&self) -> usize {
        self.config.oracle_sample.min(self.corpus.functions.len())
    }

    fn triples(&self, functions: usize) -> Vec<(usize, usize, usize)> {
        let (nk, nl) = (self.corpus.kernels.len(), self.config.k_list.len());
        (0..functions).flat_map(|f| (0..nk).flat_map(move |kr| (0..nl).map(move |ki| (f, kr, ki)))).collect()
    }

    fn atoms_list(&self) -> Vec<(usize, usize, &Atom)> {
        self.decompositions
            .iter()
            .enumerate()
            .flat_map(|(kr, d)| d.terms.iter().enumerate().map(move |(i, (_, a))| (kr, i, a)))
            .collect()
    }

    /// T_k f for every (function, kernel, k) in corpus order.
    fn tk_table(&self) -> Result<&[TestFunction]> {
        self.tk
            .get_or_init(|| {
                self.triples(self.corpus.functions.len())
                    .par_iter()
                    .map(|&(f, kr, ki)| {
                        apply_tk(
                            &self.corpus.functions[f],
                            &self.corpus.kernels[kr],
                            &self.spec(self.config.k_list[ki]),
                        )
                    })
                    .collect()
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    fn tk_at(&self, f: usize, kernel: usize, ki: usize) -> Result<&TestFunction> {
        let (nk, nl) = (self.corpus.kernels.len(), self.config.k_list.len());
        Ok(&self.tk_table()?[(f * nk + kernel) * nl + ki])
    }

    fn fourier(&self) -> Result<GroupOutput> {
        let stats = self
            .corpus
            .functions
            .par_iter()
            .map(|f| {
                let fh = fourier::forward(f);
                let round_trip = fourier::inverse(&fh).max_abs_diff(f)?;
                let naive =
                    if f.values().len() <= NAIVE_CELLS { oracle::fourier_forward(f)?.max_abs_diff(&fh)? } else { 0.0 };
                Ok((round_trip, naive, rel(fh.l2_norm(), f.lr_norm(2.0)?)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = GroupOutput::default();
        out.push(CheckRecord::within("fourier.round_trip", 1e-12, max_of(stats.iter().map(|s| s.0))));
        out.push(CheckRecord::within("fourier.fast_vs_naive", 1e-10, max_of(stats.iter().map(|s| s.1))));
        out.push(CheckRecord::within("fourier.plancherel", 1e-10, max_of(stats.iter().map(|s| s.2))));
        Ok(out)
    }

    fn discretization(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let w = self.window();
        let oracle_diff = self
            .triples(self.sample())
            .par_iter()
            .map(|&(f, kr, ki)| {
                let naive = oracle::truncated_operator(&c.functions[f], &c.kernels[kr], self.config.k_list[ki], w)?;
                self.tk_at(f, kr, ki)?.max_abs_diff(&naive)
            })
            .collect::<Result<Vec<_>>>()?;

        // T_k − T_k' against the shells k..k'−1, as functions and in L^r.
        let mut order: Vec<usize> = (0..self.config.k_list.len()).collect();
        order.sort_by_key(|&i| self.config.k_list[i]);
        let pairs: Vec<(usize, usize)> = order.windows(2).map(|p| (p[0], p[1])).collect();
        let tele = (0..c.functions.len())
            .into_par_iter()
            .map(|f| {
                let mut worst = 0.0f64;
                for kr in 0..c.kernels.len() {
                    for &(lo, hi) in &pairs {
                        let (k, k2) = (self.config.k_list[lo], self.config.k_list[hi]);
                        let diff = self.tk_at(f, kr, lo)?.sub(self.tk_at(f, kr, hi)?)?;
                        let shells = apply_shells(&c.functions[f], &c.kernels[kr], k, k2 - 1, w)?;
                        worst = worst.max(diff.max_abs_diff(&shells)?);
                        for &r in &self.config.r_list {
                            worst = worst.max((diff.lr_norm(r)? - shells.lr_norm(r)?).abs());
                        }
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;

        let h = c.field.element(w.a, vec![1, 1])?;
        let commute = self
            .triples(self.sample())
            .par_iter()
            .map(|&(f, kr, ki)| {
                let spec = self.spec(self.config.k_list[ki]);
                let lhs = apply_tk(&c.functions[f].translate(&h)?, &c.kernels[kr], &spec)?;
                let rhs = self.tk_at(f, kr, ki)?.translate(&h)?;
                lhs.max_abs_diff(&rhs)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut out = GroupOutput::default();
        out.push(CheckRecord::within("discretization.oracle_agreement", 1e-12, max_of(oracle_diff)));
        out.push(CheckRecord::within("discretization.telescoping", 1e-12, max_of(tele)));
        out.push(CheckRecord::within("discretization.translation_commutation", 1e-10, max_of(commute)));
        Ok(out)
    }

    fn atoms(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let mut invalid = 0;
        let mut recon = 0.0f64;
        let mut rows = Vec::new();
        for (kr, (kernel, d)) in c.kernels.iter().zip(&self.decompositions).enumerate() {
            invalid += d.terms.iter().filter(|(_, a)| !validate_atom(a.kernel()).valid).count();
            let back = d.reconstruct(c.field, kernel.resolution())?;
            for (x, y) in back.exact_values().iter().zip(kernel.exact_values()) {
                recon = recon.max(exact_to_complex(&(x - y)).norm());
            }
            let id = c.kernel_ids[kr].clone();
            rows.push(row(id.clone(), kernel.resolution() as i64, "h1_upper_bound".into(), d.h1_upper_bound));
            rows.push(row(id, kernel.resolution() as i64, "atoms".into(), d.terms.len() as f64));
        }
        let split = self
            .triples(self.sample())
            .par_iter()
            .map(|&(fi, kr, ki)| {
                let spec = self.spec(self.config.k_list[ki]);
                let f = &c.functions[fi];
                let mut acc = TestFunction::zero(c.field, spec.result_window(f))?;
                for (lambda, atom) in &self.decompositions[kr].terms {
                    acc = acc.add(&apply_b(f, atom, &spec)?.scale(Complex64::new(*lambda, 0.0)))?;
                }
                acc.max_abs_diff(self.tk_at(fi, kr, ki)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = GroupOutput::default();
        out.push(CheckRecord::failures("atoms.valid", invalid));
        out.push(CheckRecord::within("atoms.reconstruction", 1e-12, recon));
        out.push(CheckRecord::within("atoms.splitting_identity", 1e-10, max_of(split)));
        out.table("atoms", rows);
        Ok(out)
    }

    fn cz(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let lambdas = &self.config.lambda_list;
        let reports = (0..c.functions.len() * lambdas.len())
            .into_par_iter()
            .map(|i| {
                let f = c.functions[i / lambdas.len()].map_values(|v| Complex64::new(v.re.abs(), 0.0));
                let lambda = lambdas[i % lambdas.len()];
                let d = cz_decompose(&f, lambda, suggest_start_scale(&f, lambda)?)?;
                Ok(d.check())
            })
            .collect::<Result<Vec<_>>>()?;
        let count = |pred: &dyn Fn(&crate::decomp::CZReport) -> bool| reports.iter().filter(|r| pred(r)).count();
        let mut out = GroupOutput::default();
        out.push(CheckRecord::failures("cz.clauses", count(&|r| !r.clauses.iter().all(|c| c.holds))));
        out.push(CheckRecord::failures("cz.remark_bounds", count(&|r| !r.remark_bounds.iter().all(|c| c.holds))));
        out.push(CheckRecord::bounded("cz.remark_f1_l1_within_f", 0.0, count(&|r| !r.f1_l1_within_f) as f64));
        out.push(CheckRecord::bounded("cz.remark_f2_l1_equals_f", 0.0, count(&|r| !r.f2_l1_equals_f) as f64));
        out.push(CheckRecord::reported(
            "cz.max_f1_l1_over_f_l1",
            max_of(reports.iter().map(|r| ratio(r.f1_l1, r.f_l1))),
        ));
        Ok(out)
    }

    fn lp(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let q = c.field.q();
        let equal_pairs: Vec<(f64, f64)> =
            [0.5, 1.0].into_iter().flat_map(|s| [1.5, 2.0, 3.0].into_iter().map(move |r| (s, r))).collect();
        let stats = c
            .functions
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let blocks = lp_blocks(f)?;
                let mut sum = TestFunction::zero(c.field, f.window())?;
                for b in &blocks {
                    sum = sum.add(&b.block)?;
                }
                let recon = sum.max_abs_diff(f)?;
                let mut bf = 0.0f64;
                for &(s, r) in &equal_pairs {
                    bf = bf.max(rel(
                        besov_from_blocks(&blocks, q, s, r, r)?,
                        triebel_lizorkin_from_blocks(&blocks, q, s, r, r)?,
                    ));
                }
                let mut naive = 0.0f64;
                if i < self.sample() {
                    for p in &self.config.srt_list {
                        naive = naive.max(rel(
                            besov_from_blocks(&blocks, q, p.s, p.r, p.t)?,
                            oracle::besov_norm(f, p.s, p.r, p.t)?,
                        ));
                        naive = naive.max(rel(
                            triebel_lizorkin_from_blocks(&blocks, q, p.s, p.r, p.t)?,
                            oracle::triebel_lizorkin_norm(f, p.s, p.r, p.t)?,
                        ));
                    }
                }
                Ok((recon, bf, naive))
            })
            .collect::<Result<Vec<_>>>()?;
        let phi_d = TestFunction::from_indicator_combo(c.field, &[(Complex64::new(1.0, 0.0), Ball::ideal(0))])?;
        let blocks = lp_blocks(&phi_d)?;
        let grid = [1.5, 2.0, 3.0];
        let mut unit = 0.0f64;
        for s in [0.5, 1.0] {
            for r in grid {
                for t in grid {
                    unit = unit.max((besov_from_blocks(&blocks, q, s, r, t)? - 1.0).abs());
                    unit = unit.max((triebel_lizorkin_from_blocks(&blocks, q, s, r, t)? - 1.0).abs());
                }
            }
        }
        let mut out = GroupOutput::default();
        out.push(CheckRecord::within("lp.reconstruction", 1e-11, max_of(stats.iter().map(|s| s.0))));
        out.push(CheckRecord::within("lp.unit_ball", 1e-11, unit));
        out.push(CheckRecord::within("lp.besov_equals_tl_at_r_eq_t", 1e-11, max_of(stats.iter().map(|s| s.1))));
        out.push(CheckRecord::within("lp.oracle_agreement", 1e-10, max_of(stats.iter().map(|s| s.2))));
        Ok(out)
    }

    fn h1(&self, kernel: usize) -> f64 {
        self.decompositions[kernel].h1_upper_bound
    }

    /// ‖T_k f‖ / (q^{-k} h1 ‖f‖), with Ω = 0 giving 0.
    fn theorem_ratio(&self, tk_norm: f64, k: i64, h1: f64, f_norm: f64) -> f64 {
        ratio(tk_norm, self.q().powi(-k as i32) * h1 * f_norm)
    }

    /// Fitted constants per (k, parameter) and their spreads across k.
    fn stability(&self, out: &mut GroupOutput, prefix: &str, params: &[String], fitted: &[Vec<f64>]) {
        let factor = self.config.stability_factor;
        let mut worst = 1.0f64;
        let mut overall = 0.0f64;
        for (pi, p) in params.iter().enumerate() {
            let per_k: Vec<f64> = fitted.iter().map(|row| row[pi]).collect();
            let sp = spread(&per_k);
            worst = worst.max(sp);
            overall = overall.max(max_of(per_k.iter().cloned()));
            out.push(CheckRecord::bounded(format!("{prefix}.stability[{p}]"), factor, sp));
        }
        out.push(CheckRecord::bounded(format!("{prefix}.stability"), factor, worst));
        out.push(CheckRecord::reported(format!("{prefix}.fitted_constant"), overall));
        let all: Vec<f64> = fitted.iter().flatten().cloned().collect();
        out.push(CheckRecord::reported(format!("{prefix}.joint_spread"), spread(&all)));
        // Without the q^{-k} factor: the spread of sup ‖T_k f‖ / (h1 ‖f‖).
        let raw: Vec<f64> = (0..params.len())
            .map(|pi| {
                let per_k: Vec<f64> = fitted
                    .iter()
                    .zip(&self.config.k_list)
                    .map(|(row, &k)| row[pi] * self.q().powi(-k as i32))
                    .collect();
                spread(&per_k)
            })
            .collect();
        out.push(CheckRecord::reported(format!("{prefix}.uncompensated_spread"), max_of(raw)));
    }

    fn lebesgue(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let rs = &self.config.r_list;
        let ks = &self.config.k_list;
        let f_norms = c
            .functions
            .iter()
            .map(|f| rs.iter().map(|&r| f.lr_norm(r)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let triples = self.triples(c.functions.len());
        let tk_norms = triples
            .par_iter()
            .map(|&(f, kr, ki)| {
                let g = self.tk_at(f, kr, ki)?;
                rs.iter().map(|&r| g.lr_norm(r)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut fitted = vec![vec![0.0f64; rs.len()]; ks.len()];
        let mut rows = Vec::new();
        let mut skipped = 0usize;
        for (&(f, kr, ki), norms) in triples.iter().zip(&tk_norms) {
            for (ri, &r) in rs.iter().enumerate() {
                if f_norms[f][ri] == 0.0 {
                    skipped += 1;
                    continue;
                }
                let v = self.theorem_ratio(norms[ri], ks[ki], self.h1(kr), f_norms[f][ri]);
                fitted[ki][ri] = fitted[ki][ri].max(v);
                rows.push(row(self.id(f, kr), ks[ki], format!("r={r}"), v));
            }
        }

        // Scaling f by 5 and Ω by 3 must leave every ratio unchanged.
        let three = ExactComplex::new(Rational::from_integer(3.into()), Rational::zero());
        let homog = self
            .triples(self.sample())
            .par_iter()
            .map(|&(f, kr, ki)| {
                let g = c.functions[f].scale(Complex64::new(5.0, 0.0));
                let kernel = c.kernels[kr].scale(&three);
                let h1 = atomic_decompose(&kernel)?.h1_upper_bound;
                let tg = apply_tk(&g, &kernel, &self.spec(ks[ki]))?;
                let mut worst = 0.0f64;
                for (ri, &r) in rs.iter().enumerate() {
                    if f_norms[f][ri] == 0.0 {
                        continue;
                    }
                    let base = self.theorem_ratio(
                        tk_norms[(f * c.kernels.len() + kr) * ks.len() + ki][ri],
                        ks[ki],
                        self.h1(kr),
                        f_norms[f][ri],
                    );
                    worst = worst.max(rel(self.theorem_ratio(tg.lr_norm(r)?, ks[ki], h1, g.lr_norm(r)?), base));
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;

        // The full pipeline against the definition-level double sum on the
        // first fixture pair at r = 2.
        let mut fixture_rows = Vec::new();
        let mut fixture = 0.0f64;
        let f0 = &c.functions[0];
        let f0_norm = f0.lr_norm(2.0)?;
        for (ki, &k) in ks.iter().enumerate() {
            let pipeline = self.theorem_ratio(self.tk_at(0, 0, ki)?.lr_norm(2.0)?, k, self.h1(0), f0_norm);
            let naive = oracle::truncated_operator(f0, &c.kernels[0], k, self.window())?;
            let reference = self.theorem_ratio(naive.lr_norm(2.0)?, k, self.h1(0), f0_norm);
            fixture = fixture.max(rel(pipeline, reference));
            fixture_rows.push(row(self.id(0, 0), k, "r=2".into(), pipeline));
        }

        let mut out = GroupOutput::default();
        let params: Vec<String> = rs.iter().map(|r| format!("r={r}")).collect();
        self.stability(&mut out, "lebesgue", &params, &fitted);
        out.push(CheckRecord::reported("lebesgue.skipped_degenerate", skipped as f64));
        out.push(CheckRecord::within("lebesgue.homogeneity", 1e-12, max_of(homog)));
        out.push(CheckRecord::within("lebesgue.fixture_oracle", 1e-10, fixture));
        let mut fitted_rows = Vec::new();
        for (ki, &k) in ks.iter().enumerate() {
            for (ri, p) in params.iter().enumerate() {
                fitted_rows.push(row("sup".into(), k, p.clone(), fitted[ki][ri]));
            }
        }
        out.table("lebesgue", rows);
        out.table("lebesgue_fitted", fitted_rows);
        out.table("lebesgue_fixture", fixture_rows);
        Ok(out)
    }

    fn norms_for(&self, blocks: &[LPBlock], p: &Srt) -> Result<(f64, f64)> {
        let q = self.corpus.field.q();
        Ok((besov_from_blocks(blocks, q, p.s, p.r, p.t)?, triebel_lizorkin_from_blocks(blocks, q, p.s, p.r, p.t)?))
    }

    fn besov_tl(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let ks = &self.config.k_list;
        let srt = &self.config.srt_list;
        let f_norms = c
            .functions
            .par_iter()
            .map(|f| {
                let blocks = lp_blocks(f)?;
                srt.iter().map(|p| self.norms_for(&blocks, p)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let triples = self.triples(c.functions.len());
        let tk_norms = triples
            .par_iter()
            .map(|&(f, kr, ki)| {
                let blocks = lp_blocks(self.tk_at(f, kr, ki)?)?;
                srt.iter().map(|p| self.norms_for(&blocks, p)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut fitted_b = vec![vec![0.0f64; srt.len()]; ks.len()];
        let mut fitted_f = fitted_b.clone();
        let (mut rows_b, mut rows_f) = (Vec::new(), Vec::new());
        let mut r_eq_t = 0.0f64;
        let mut skipped = 0usize;
        for (&(f, kr, ki), norms) in triples.iter().zip(&tk_norms) {
            for (pi, p) in srt.iter().enumerate() {
                let (fb, ff) = f_norms[f][pi];
                if fb == 0.0 || ff == 0.0 {
                    skipped += 1;
                    continue;
                }
                let vb = self.theorem_ratio(norms[pi].0, ks[ki], self.h1(kr), fb);
                let vf = self.theorem_ratio(norms[pi].1, ks[ki], self.h1(kr), ff);
                if p.r == p.t {
                    r_eq_t = r_eq_t.max(rel(vb, vf));
                }
                fitted_b[ki][pi] = fitted_b[ki][pi].max(vb);
                fitted_f[ki][pi] = fitted_f[ki][pi].max(vf);
                rows_b.push(row(self.id(f, kr), ks[ki], p.to_string(), vb));
                rows_f.push(row(self.id(f, kr), ks[ki], p.to_string(), vf));
            }
        }

        // Norm oracle on sampled f and T_{k_0} f with the first kernel.
        let naive = (0..self.sample())
            .into_par_iter()
            .map(|f| {
                let mut worst = 0.0f64;
                for g in [&c.functions[f], self.tk_at(f, 0, 0)?] {
                    let blocks = lp_blocks(g)?;
                    for p in srt {
                        let (b, t) = self.norms_for(&blocks, p)?;
                        worst = worst.max(rel(b, oracle::besov_norm(g, p.s, p.r, p.t)?));
                        worst = worst.max(rel(t, oracle::triebel_lizorkin_norm(g, p.s, p.r, p.t)?));
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;

        // Per-piece ratios ‖g_j ∗ f‖ / ‖f‖ under both readings.
        let atoms = self.atoms_list();
        let j_lo = ks.iter().cloned().min().unwrap_or(-1).min(-1);
        let pieces = atoms
            .par_iter()
            .map(|&(kr, ai, atom)| {
                let mut literal = 0.0f64;
                let mut extended: BTreeMap<(i64, usize, bool), f64> = BTreeMap::new();
                for (f, fun) in c.functions.iter().enumerate() {
                    let b = lp_blocks(&atom.kernel().on_shell(0).convolve(fun)?)?;
                    for (pi, p) in srt.iter().enumerate() {
                        let (nb, nf) = self.norms_for(&b, p)?;
                        literal = literal.max(ratio(nb, f_norms[f][pi].0)).max(ratio(nf, f_norms[f][pi].1));
                    }
                    for j in j_lo..=self.spec(0).j_max(fun) {
                        let piece = SphereKernelPiece::new(atom.kernel(), j).function.convolve(fun)?;
                        let b = lp_blocks(&piece)?;
                        for (pi, p) in srt.iter().enumerate() {
                            let (nb, nf) = self.norms_for(&b, p)?;
                            let eb = extended.entry((j, pi, false)).or_insert(0.0);
                            *eb = eb.max(ratio(nb, f_norms[f][pi].0));
                            let ef = extended.entry((j, pi, true)).or_insert(0.0);
                            *ef = ef.max(ratio(nf, f_norms[f][pi].1));
                        }
                    }
                }
                let rows: Vec<TableRow> = extended
                    .iter()
                    .map(|(&(j, pi, tl), &v)| {
                        let space = if tl { "F" } else { "B" };
                        row(format!("max@{}", self.atom_id(kr, ai)), j, format!("{};space={space}", srt[pi]), v)
                    })
                    .collect();
                Ok((literal, rows))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut out = GroupOutput::default();
        let params: Vec<String> = srt.iter().map(|p| p.to_string()).collect();
        self.stability(&mut out, "besov", &params, &fitted_b);
        self.stability(&mut out, "triebel_lizorkin", &params, &fitted_f);
        out.push(CheckRecord::reported("besov_tl.skipped_degenerate", skipped as f64));
        out.push(CheckRecord::within("besov_tl.f_equals_b_at_r_eq_t", 1e-10, r_eq_t));
        out.push(CheckRecord::within("besov_tl.oracle_agreement", 1e-10, max_of(naive)));
        let literal = max_of(pieces.iter().map(|p| p.0));
        out.push(CheckRecord {
            name: "besov_tl.piece_reading_b".into(),
            claimed: Some(1.0),
            measured: literal,
            pass: Some(literal <= 1.0 + 1e-10),
            kind: CheckKind::Exact,
        });
        let extended_rows: Vec<TableRow> = pieces.into_iter().flat_map(|p| p.1).collect();
        out.push(CheckRecord::bounded("besov_tl.piece_reading_a", 1.0, max_of(extended_rows.iter().map(|r| r.ratio))));
        out.table("besov", rows_b);
        out.table("triebel_lizorkin", rows_f);
        out.table("piece_reading_a", extended_rows);
        Ok(out)
    }

    fn proof_constants(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let ks = &self.config.k_list;
        let lambdas = &self.config.lambda_list;
        let q = self.q();
        let weak_bound = 1.0 + 4.0 * q;
        let atoms = self.atoms_list();
        let per_atom = atoms
            .par_iter()
            .map(|&(kr, ai, atom)| {
                let mut l2_rows = Vec::new();
                let mut l2 = [0.0f64; 2];
                let mut weak = vec![[0.0f64; 2]; ks.len() * lambdas.len()];
                for (f, fun) in c.functions.iter().enumerate() {
                    let (n2, n1) = (fun.lr_norm(2.0)?, fun.lr_norm(1.0)?);
                    if n2 == 0.0 {
                        continue;
                    }
                    for (ki, &k) in ks.iter().enumerate() {
                        let spec = self.spec(k);
                        let bound = q.powi(-k as i32) / (q - 1.0);
                        let outs = [apply_b(fun, atom, &spec)?, apply_b_literal(fun, atom, &spec)?];
                        for (reading, bf) in outs.iter().enumerate() {
                            let v = bf.lr_norm(2.0)? / n2 / bound;
                            l2[reading] = l2[reading].max(v);
                            let name = if reading == 0 { "reading=a" } else { "reading=b" };
                            l2_rows.push(row(
                                format!("{}@{}", c.function_ids[f], self.atom_id(kr, ai)),
                                k,
                                name.into(),
                                v,
                            ));
                            for (li, &lambda) in lambdas.iter().enumerate() {
                                let m = rational_to_f64(&bf.weak_level_measure(lambda)?);
                                let slot = &mut weak[ki * lambdas.len() + li][reading];
                                *slot = slot.max(m * lambda / n1 / weak_bound);
                            }
                        }
                    }
                }
                let mut weak_rows = Vec::new();
                for (ki, &k) in ks.iter().enumerate() {
                    for (li, &lambda) in lambdas.iter().enumerate() {
                        for (reading, name) in ["a", "b"].iter().enumerate() {
                            weak_rows.push(row(
                                format!("max@{}", self.atom_id(kr, ai)),
                                k,
                                format!("reading={name};lambda={lambda}"),
                                weak[ki * lambdas.len() + li][reading],
                            ));
                        }
                    }
                }
                let weak_max = [max_of(weak.iter().map(|w| w[0])), max_of(weak.iter().map(|w| w[1]))];
                Ok((l2, weak_max, l2_rows, weak_rows))
            })
            .collect::<Result<Vec<_>>>()?;

        let (fixture_diff, fixture_rows) = self.proof_fixtures()?;
        let mut out = GroupOutput::default();
        for (reading, name) in ["a", "b"].iter().enumerate() {
            out.push(CheckRecord::bounded(
                format!("proof.l2_bound[reading={name}]"),
                1.0,
                max_of(per_atom.iter().map(|p| p.0[reading])),
            ));
            out.push(CheckRecord::bounded(
                format!("proof.weak11_bound[reading={name}]"),
                1.0,
                max_of(per_atom.iter().map(|p| p.1[reading])),
            ));
        }
        out.push(CheckRecord::within("proof.oracle_fixtures", 1e-10, fixture_diff));
        let mut l2_rows = Vec::new();
        let mut weak_rows = Vec::new();
        for p in per_atom {
            l2_rows.extend(p.2);
            weak_rows.extend(p.3);
        }
        out.table("proof_l2", l2_rows);
        out.table("proof_weak11", weak_rows);
        out.table("proof_fixtures", fixture_rows);
        Ok(out)
    }

    /// The three fixtures (Φ_𝔇, k = 0, reading A), (Φ_{𝔓²}, k = −1,
    /// reading A) and (Φ_{𝔓²}, k = −1, reading B) with the balanced atom,
    /// pipeline against brute force.
    fn proof_fixtures(&self) -> Result<(f64, Vec<TableRow>)> {
        let field = self.corpus.field;
        let w = self.window();
        let one = Complex64::new(1.0, 0.0);
        let phi_d = TestFunction::from_indicator_combo(field, &[(one, Ball::ideal(0))])?;
        let phi_p2 = TestFunction::from_indicator_combo(field, &[(one, Ball::ideal(2))])?;
        let atom = Atom::new(super::balanced_atom(field))?;
        let cases = [
            ("phi_D;reading=a", &phi_d, 0, false),
            ("phi_P2;reading=a", &phi_p2, -1, false),
            ("phi_P2;reading=b", &phi_p2, -1, true),
        ];
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        for (name, f, k, literal) in cases {
            let spec = self.spec(k);
            let (pipeline, naive) = if literal {
                (apply_b_literal(f, &atom, &spec)?, oracle::literal_b(f, atom.kernel(), k, w)?)
            } else {
                (apply_b(f, &atom, &spec)?, oracle::truncated_operator(f, atom.kernel(), k, w)?)
            };
            let l2 = |g: &TestFunction| -> Result<f64> { Ok(g.lr_norm(2.0)? / f.lr_norm(2.0)?) };
            let weak = |g: &TestFunction| -> Result<f64> {
                Ok(rational_to_f64(&g.weak_level_measure(WEAK_FIXTURE_LEVEL)?) * WEAK_FIXTURE_LEVEL / f.lr_norm(1.0)?)
            };
            worst = worst.max(pipeline.max_abs_diff(&naive)?);
            worst = worst.max(rel(l2(&pipeline)?, l2(&naive)?));
            worst = worst.max(rel(weak(&pipeline)?, weak(&naive)?));
            rows.push(row(name.into(), k, "l2_ratio".into(), l2(&pipeline)?));
            rows.push(row(name.into(), k, format!("weak_ratio;lambda={WEAK_FIXTURE_LEVEL}"), weak(&pipeline)?));
        }
        Ok((worst, rows))
    }

    fn taibleson(&self) -> Result<GroupOutput> {
        let c = self.corpus;
        let mut unstable = 0;
        let mut infinite = 0;
        let mut naive = 0.0f64;
        let mut rows = Vec::new();
        let per_kernel_constants =
            if let Some(Ok(table)) = self.tk.get() { Some(self.per_kernel_constants(table)?) } else { None };
        for (kr, kernel) in c.kernels.iter().enumerate() {
            let m = kernel.resolution();
            let stable = taibleson_modulus(kernel, m.saturating_sub(1));
            if [m, m + 1, m + 4].iter().any(|&j| taibleson_modulus(kernel, j).to_bits() != stable.to_bits()) {
                unstable += 1;
            }
            if !stable.is_finite() {
                infinite += 1;
            }
            naive = naive.max((stable - oracle::taibleson_modulus(kernel, m + 1)).abs());
            let id = c.kernel_ids[kr].clone();
            rows.push(row(id.clone(), m as i64, "modulus".into(), stable));
            rows.push(row(id.clone(), m as i64, "h1_upper_bound".into(), self.h1(kr)));
            if let Some(consts) = &per_kernel_constants {
                for (ri, r) in self.config.r_list.iter().enumerate() {
                    rows.push(row(id.clone(), m as i64, format!("fitted_constant;r={r}"), consts[kr][ri]));
                }
            }
        }
        let mut out = GroupOutput::default();
        out.push(CheckRecord::failures("taibleson.stabilization", unstable));
        out.push(CheckRecord::failures("taibleson.finite_modulus", infinite));
        out.push(CheckRecord::within("taibleson.oracle_agreement", 1e-12, naive));
        out.table("taibleson", rows);
        Ok(out)
    }

    /// sup over f and k of the L^r theorem ratio, per kernel and r.
    fn per_kernel_constants(&self, table: &[TestFunction]) -> Result<Vec<Vec<f64>>> {
        let c = self.corpus;
        let rs = &self.config.r_list;
        let mut out = vec![vec![0.0f64; rs.len()]; c.kernels.len()];
        for (idx, &(f, kr, ki)) in self.triples(c.functions.len()).iter().enumerate() {
            for (ri, &r) in rs.iter().enumerate() {
                let fnorm = c.functions[f].lr_norm(r)?;
                if fnorm == 0.0 {
                    continue;
                }
                let v = self.theorem_ratio(table[idx].lr_norm(r)?, self.config.k_list[ki], self.h1(kr), fnorm);
                out[kr][ri] = out[kr][ri].max(v);
            }
        }
        Ok(out)
    }

    fn unity(&self) -> Result<GroupOutput> {
        let field = self.corpus.field;
        let mut orders: Vec<f64> = self.config.srt_list.iter().map(|p| p.s).collect();
        orders.sort_by(f64::total_cmp);
        orders.dedup();
        if orders.is_empty() {
            orders.push(1.0);
        }
        let mut broken = 0;
        let mut closed = 0.0f64;
        let (mut stated, mut rescaled) = (1.0f64, 1.0f64);
        let mut rows = Vec::new();
        for &s in &orders {
            let rep = verify_unity_decomposition(field, self.window(), s)?;
            if !(rep.supports_ok && rep.partition_ok) {
                broken += 1;
            }
            for r in &rep.rows {
                closed = closed.max(rel(r.sup, unity_sup_closed_form(field.q(), r.j, s)));
                rows.push(row("phi_j".into(), r.j, format!("s={s};c=stated"), r.c_stated));
                rows.push(row("phi_j".into(), r.j, format!("s={s};c=rescaled"), r.c_rescaled));
            }
            stated = stated.max(spread(&rep.rows.iter().map(|r| r.c_stated).collect::<Vec<_>>()));
            rescaled = rescaled.max(spread(&rep.rows.iter().map(|r| r.c_rescaled).collect::<Vec<_>>()));
        }
        let factor = self.config.stability_factor;
        let mut out = GroupOutput::default();
        out.push(CheckRecord::failures("unity.partition", broken));
        out.push(CheckRecord::within("unity.closed_form", 1e-9, closed));
        out.push(CheckRecord::bounded("unity.c_stated_spread", factor, stated));
        out.push(CheckRecord::bounded("unity.c_rescaled_spread", factor, rescaled));
        out.table("unity", rows);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_guards() {
        assert_eq!(spread(&[]), 1.0);
        assert_eq!(spread(&[0.0, 0.0]), 1.0);
        assert_eq!(spread(&[0.0, 1.0]), f64::MAX);
        assert_eq!(spread(&[1.0, 4.0, 2.0]), 4.0);
    }

    #[test]
    fn rel_guards() {
        assert_eq!(rel(0.0, 0.0), 0.0);
        assert!((rel(1.0, 1.0 + 1e-12) - 1e-12).abs() < 1e-15);
    }
}
