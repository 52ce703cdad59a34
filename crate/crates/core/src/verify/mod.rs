//! The verification harness: a seeded corpus, the theorem-level ratio
//! protocols, exact invariant checks against the brute-force oracle, and
//! the deterministic report.

mod checks;
pub mod corpus;
pub mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::testfn::Window;

pub use corpus::{balanced_atom, generate_corpus, two_cell_kernel, Corpus, CorpusSpec};
pub use report::{CheckKind, CheckRecord, Format, TableRow, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    Fourier,
    Discretization,
    Atoms,
    Cz,
    Lp,
    Lebesgue,
    BesovTl,
    ProofConstants,
    Taibleson,
    Unity,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 10] = [
        CheckGroup::Fourier,
        CheckGroup::Discretization,
        CheckGroup::Atoms,
        CheckGroup::Cz,
        CheckGroup::Lp,
        CheckGroup::Lebesgue,
        CheckGroup::BesovTl,
        CheckGroup::ProofConstants,
        CheckGroup::Taibleson,
        CheckGroup::Unity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Fourier => "fourier",
            CheckGroup::Discretization => "discretization",
            CheckGroup::Atoms => "atoms",
            CheckGroup::Cz => "cz",
            CheckGroup::Lp => "lp",
            CheckGroup::Lebesgue => "lebesgue",
            CheckGroup::BesovTl => "besov_tl",
            CheckGroup::ProofConstants => "proof_constants",
            CheckGroup::Taibleson => "taibleson",
            CheckGroup::Unity => "unity",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

/// A Besov or Triebel–Lizorkin parameter triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Srt {
    pub s: f64,
    pub r: f64,
    pub t: f64,
}

impl fmt::Display for Srt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={};r={};t={}", self.s, self.r, self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub field: FieldConfig,
    pub corpus: CorpusSpec,
    pub checks: Vec<CheckGroup>,
    pub k_list: Vec<i64>,
    pub r_list: Vec<f64>,
    pub srt_list: Vec<Srt>,
    pub lambda_list: Vec<f64>,
    /// Allowed max/min spread of the per-k fitted constants.
    pub stability_factor: f64,
    /// Number of leading corpus functions run through the brute-force oracle.
    pub oracle_sample: usize,
    /// Wall-clock timings make the report machine-dependent; off by default.
    pub record_timings: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        let srt = |s, r, t| Srt { s, r, t };
        HarnessConfig {
            field: FieldConfig::padic(2).expect("2 is prime"),
            corpus: CorpusSpec {
                seed: 42,
                count: 50,
                window: Window { a: -3, l: 3 },
                kernel_resolutions: vec![2, 3, 3],
            },
            checks: CheckGroup::ALL.to_vec(),
            k_list: vec![-3, -2, -1, 0],
            r_list: vec![1.5, 2.0, 3.0],
            srt_list: [0.5, 1.0]
                .into_iter()
                .flat_map(|s| [srt(s, 2.0, 2.0), srt(s, 1.5, 3.0), srt(s, 3.0, 1.5)])
                .collect(),
            lambda_list: vec![0.1, 0.5, 1.0, 2.0],
            stability_factor: 4.0,
            oracle_sample: 4,
            record_timings: false,
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        Window::new(self.corpus.window.a, self.corpus.window.l)?;
        self.corpus.window.cells(&self.field)?;
        if self.corpus.count == 0 {
            return Err(Error::LengthMismatch { expected: 1, actual: 0 });
        }
        if self.corpus.kernel_resolutions.iter().any(|&m| m == 0) {
            return Err(Error::InvalidResolution);
        }
        for &r in self.r_list.iter().chain(self.srt_list.iter().flat_map(|p| [&p.r, &p.t])) {
            if !(r > 1.0 && r.is_finite()) {
                return Err(Error::InvalidExponent(r));
            }
        }
        if let Some(p) = self.srt_list.iter().find(|p| !(p.s > 0.0 && p.s.is_finite())) {
            return Err(Error::NegativeOrder(p.s));
        }
        if let Some(&lam) = self.lambda_list.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::NonPositiveLevel(lam));
        }
        if !(self.stability_factor >= 1.0 && self.stability_factor.is_finite()) {
            return Err(Error::InvalidExponent(self.stability_factor));
        }
        Ok(())
    }
}

/// Runs every selected check group in canonical order.
pub fn run(config: &HarnessConfig) -> Result<VerificationReport> {
    config.validate()?;
    let corpus = generate_corpus(config.field, &config.corpus)?;
    let mut value = serde_json::to_value(config).expect("config serializes");
    value["corpus_description"] = serde_json::Value::String(corpus.description.clone());
    let mut report = VerificationReport::empty(value, config.corpus.seed);
    let ctx = checks::Context::new(config, &corpus)?;
    for group in CheckGroup::ALL.into_iter().filter(|g| config.checks.contains(g)) {
        let start = Instant::now();
        let out = ctx.run_group(group)?;
        report.checks.extend(out.checks);
        report.tables.extend(out.tables);
        if config.record_timings {
            report.timing_ms.insert(group.name().to_string(), start.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok(report)
}
