use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use localfield::decomp::{
    besov_norm, cz_decompose, lebesgue_norm, suggest_start_scale, triebel_lizorkin_norm, NormReport,
};
use localfield::fourier::{self, SpectralFunctionRecord};
use localfield::kernels::{atomic_decompose, validate_atom, AngularKernelRecord};
use localfield::operators::apply_tk;
use localfield::oracle;
use localfield::testfn::TestFunctionRecord;
use localfield::verify;
use localfield::{AngularKernel, SpectralFunction, TestFunction, TruncationSpec, Window};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, ConfigFile, RunConfig};
use crate::{Cli, Command};

/// Ok(true) when every exact invariant of the subcommand held.
pub fn run(cli: &Cli) -> Result<bool> {
    let file = match &cli.global.config {
        Some(path) => config::load_file(path)?,
        None => ConfigFile::default(),
    };
    let rc = config::resolve(file, &cli.global.overrides())?;
    match &cli.command {
        Command::Transform { input, inverse } => transform(&rc, input, *inverse),
        Command::ApplyTk { input, kernel, level } => tk(&rc, input, kernel, *level),
        Command::CzDecompose { input, level, start_scale } => cz(&rc, input, *level, *start_scale),
        Command::Norms { input } => norms(&rc, input),
        Command::Atoms { kernel } => atoms(&rc, kernel),
        Command::Verify => run_verify(&rc),
        Command::Bench { max_depth } => bench(&rc, *max_depth),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| anyhow::anyhow!("{}: {}: {}", path.display(), e.path(), e.inner()))
}

fn write_json(rc: &RunConfig, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    std::fs::create_dir_all(&rc.out_dir).with_context(|| format!("creating {}", rc.out_dir.display()))?;
    let path = rc.out_dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn read_function(rc: &RunConfig, path: &Path) -> Result<TestFunction> {
    let rec: TestFunctionRecord = read_json(path)?;
    TestFunction::from_record(rc.field(), &rec).with_context(|| format!("{}", path.display()))
}

fn read_kernel(rc: &RunConfig, path: &Path) -> Result<AngularKernel> {
    let rec: AngularKernelRecord = read_json(path)?;
    AngularKernel::from_record(rc.field(), &rec).with_context(|| format!("{}", path.display()))
}

fn transform(rc: &RunConfig, input: &Path, inverse: bool) -> Result<bool> {
    if inverse {
        let rec: SpectralFunctionRecord = read_json(input)?;
        let spec = SpectralFunction::from_record(rc.field(), &rec)?;
        let f = fourier::inverse(&spec);
        let err = fourier::forward(&f).max_abs_diff(&spec)?;
        write_json(rc, "inverse.json", &f.to_record())?;
        return Ok(err <= 1e-12 * spec.sup_norm().max(1.0));
    }
    let f = read_function(rc, input)?;
    let spec = fourier::forward(&f);
    let err = fourier::inverse(&spec).max_abs_diff(&f)?;
    write_json(rc, "transform.json", &spec.to_record())?;
    Ok(err <= 1e-12 * f.sup_norm().max(1.0))
}

fn tk(rc: &RunConfig, input: &Path, kernel: &Path, level: Option<i64>) -> Result<bool> {
    let f = read_function(rc, input)?;
    let kernel = read_kernel(rc, kernel)?;
    let k = level.or(rc.harness.k_list.first().copied()).unwrap_or(0);
    let w = rc.window();
    let out = apply_tk(&f, &kernel, &TruncationSpec::new(k, w.a, w.l)?)?;
    write_json(rc, "apply_tk.json", &out.to_record())?;
    Ok(true)
}

fn cz(rc: &RunConfig, input: &Path, level: Option<f64>, start: Option<i64>) -> Result<bool> {
    let f = read_function(rc, input)?;
    let lambda = level.or(rc.harness.lambda_list.first().copied()).unwrap_or(1.0);
    let start = match start {
        Some(s) => s,
        None => suggest_start_scale(&f, lambda)?,
    };
    let d = cz_decompose(&f, lambda, start)?;
    let report = d.check();
    let pass = report.exact_pass();
    write_json(
        rc,
        "cz.json",
        &json!({
            "lambda": lambda,
            "start_scale": d.start_scale,
            "window": d.window,
            "balls": d.balls,
            "exceptional_measure": localfield::exact::rational_to_f64(&d.exceptional_measure),
            "f1": d.bad_part.to_record(),
            "f2": d.good_part.to_record(),
            "report": report,
        }),
    )?;
    for c in report.clauses.iter().chain(&report.remark_bounds) {
        println!("{:<48} {}", c.name, if c.holds { "holds" } else { "FAILS" });
    }
    Ok(pass)
}

fn norms(rc: &RunConfig, input: &Path) -> Result<bool> {
    let f = read_function(rc, input)?;
    let mut reports: Vec<NormReport> = Vec::new();
    for &r in &rc.harness.r_list {
        reports.push(lebesgue_norm(&f, r)?);
    }
    for p in &rc.harness.srt_list {
        reports.push(besov_norm(&f, p.s, p.r, p.t)?);
        reports.push(triebel_lizorkin_norm(&f, p.s, p.r, p.t)?);
    }
    write_json(rc, "norms.json", &reports)?;
    Ok(true)
}

fn atoms(rc: &RunConfig, kernel: &Path) -> Result<bool> {
    let kernel = read_kernel(rc, kernel)?;
    let d = atomic_decompose(&kernel)?;
    let back = d.reconstruct(rc.field(), kernel.resolution())?;
    let exact = back.exact_values() == kernel.exact_values();
    let terms: Vec<_> = d
        .terms
        .iter()
        .map(|(lambda, a)| json!({"lambda": lambda, "atom": a.kernel().to_record(), "valid": validate_atom(a.kernel()).valid}))
        .collect();
    let valid = d.terms.iter().all(|(_, a)| validate_atom(a.kernel()).valid);
    write_json(
        rc,
        "atoms.json",
        &json!({"h1_upper_bound": d.h1_upper_bound, "terms": terms, "reconstruction_exact": exact}),
    )?;
    Ok(valid && exact)
}

fn run_verify(rc: &RunConfig) -> Result<bool> {
    let report = verify::run(&rc.harness)?;
    for path in report.emit(&rc.out_dir, rc.format)? {
        println!("wrote {}", path.display());
    }
    for c in &report.checks {
        let verdict = match c.pass {
            Some(true) => "pass",
            Some(false) if c.failed_exact() => "FAIL",
            Some(false) => "exceeds",
            None => "-",
        };
        let claimed = c.claimed.map_or_else(|| "-".to_string(), |v| format!("{v:e}"));
        println!("{:<48} {:>14e} {:>10} {}", c.name, c.measured, claimed, verdict);
    }
    let failures = report.exact_failures();
    println!("{} checks, {} exact failures", report.checks.len(), failures.len());
    Ok(failures.is_empty())
}

fn bench(rc: &RunConfig, max_depth: u32) -> Result<bool> {
    let field = rc.field();
    let mut rows = Vec::new();
    let mut pass = true;
    for depth in 1..=max_depth {
        let w = Window { a: 0, l: depth as i64 };
        let cells = w.cells(&field)?;
        if cells as u128 > config::WINDOW_CAP && !rc.override_window_cap {
            break;
        }
        let values =
            (0..cells).map(|i| num_complex::Complex64::new((i as f64).sin(), (0.5 * i as f64).cos())).collect();
        let f = TestFunction::from_values(field, w, values)?;
        let start = Instant::now();
        let fast = fourier::forward(&f);
        let fast_ms = start.elapsed().as_secs_f64() * 1e3;
        let (naive_ms, diff) = if cells <= 4096 {
            let start = Instant::now();
            let naive = oracle::fourier_forward(&f)?;
            (Some(start.elapsed().as_secs_f64() * 1e3), Some(naive.max_abs_diff(&fast)?))
        } else {
            (None, None)
        };
        pass &= diff.map_or(true, |d| d <= 1e-10);
        println!(
            "{cells:>8} cells  fast {fast_ms:>10.3} ms  naive {:>10} ms",
            naive_ms.map_or("-".into(), |t| format!("{t:.3}"))
        );
        rows.push(json!({"cells": cells, "fast_ms": fast_ms, "naive_ms": naive_ms, "max_abs_diff": diff}));
    }
    write_json(rc, "bench.json", &rows)?;
    Ok(pass)
}
