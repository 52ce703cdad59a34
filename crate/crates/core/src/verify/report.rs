use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact checks are invariants that must hold up to float tolerance;
/// measured checks report empirical constants and never fail a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Exact,
    Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub claimed: Option<f64>,
    pub measured: f64,
    pub pass: Option<bool>,
    pub kind: CheckKind,
}

impl CheckRecord {
    /// An exact check passing when `measured <= tolerance`.
    pub fn within(name: impl Into<String>, tolerance: f64, measured: f64) -> Self {
        CheckRecord {
            name: name.into(),
            claimed: Some(tolerance),
            measured,
            pass: Some(measured <= tolerance),
            kind: CheckKind::Exact,
        }
    }

    /// An exact check counting failures; passes on zero.
    pub fn failures(name: impl Into<String>, count: usize) -> Self {
        CheckRecord {
            name: name.into(),
            claimed: Some(0.0),
            measured: count as f64,
            pass: Some(count == 0),
            kind: CheckKind::Exact,
        }
    }

    /// A measured value against a claimed upper bound.
    pub fn bounded(name: impl Into<String>, claimed: f64, measured: f64) -> Self {
        CheckRecord {
            name: name.into(),
            claimed: Some(claimed),
            measured,
            pass: Some(measured <= claimed),
            kind: CheckKind::Measured,
        }
    }

    /// A measured value with nothing to compare against.
    pub fn reported(name: impl Into<String>, measured: f64) -> Self {
        CheckRecord { name: name.into(), claimed: None, measured, pass: None, kind: CheckKind::Measured }
    }

    pub fn failed_exact(&self) -> bool {
        self.kind == CheckKind::Exact && self.pass == Some(false)
    }
}

/// One CSV row: the kernel is folded into `function_id` as `f@kernel`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableRow {
    pub function_id: String,
    pub k: i64,
    pub param: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub tables: BTreeMap<String, Vec<TableRow>>,
    pub timing_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

impl VerificationReport {
    pub fn empty(config: serde_json::Value, seed: u64) -> Self {
        VerificationReport { config, seed, checks: Vec::new(), tables: BTreeMap::new(), timing_ms: BTreeMap::new() }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exact_failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| c.failed_exact()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite or null");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedElement(e.to_string()))
    }

    /// `check,functionId,k,param,ratio`, tables in name order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,functionId,k,param,ratio\n");
        for (check, rows) in &self.tables {
            for row in rows {
                writeln!(out, "{},{},{},{},{}", check, row.function_id, row.k, row.param, row.ratio).unwrap();
            }
        }
        out
    }

    /// Writes `report.json` and/or `tables.csv` into `dir`.
    pub fn emit(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        let io =
            |path: &Path, e: std::io::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        if format.json() {
            let path = dir.join("report.json");
            std::fs::write(&path, self.to_json()).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        if format.csv() {
            let path = dir.join("tables.csv");
            std::fs::write(&path, self.to_csv()).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::empty(serde_json::json!({"p": 2}), 42);
        r.checks.push(CheckRecord::within("a", 1e-12, 0.0));
        r.checks.push(CheckRecord::reported("b", 1.25));
        r.tables.insert(
            "t".into(),
            vec![TableRow { function_id: "phi_D@two_cell".into(), k: -1, param: "r=2".into(), ratio: 0.5 }],
        );
        r
    }

    #[test]
    fn empty_skeleton_is_valid_json() {
        let r = VerificationReport::empty(serde_json::Value::Null, 7);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["config", "seed", "checks", "tables", "timing_ms"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(r.to_csv(), "check,functionId,k,param,ratio\n");
    }

    #[test]
    fn json_round_trip_and_schema_shape() {
        let r = sample();
        let text = r.to_json();
        assert_eq!(VerificationReport::from_json(&text).unwrap(), r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let check = &v["checks"][1];
        assert!(check["claimed"].is_null() && check["pass"].is_null());
        assert!(check["measured"].is_f64() && check["name"].is_string());
        assert_eq!(r.to_json(), text);
    }

    #[test]
    fn csv_rows() {
        assert_eq!(sample().to_csv(), "check,functionId,k,param,ratio\nt,phi_D@two_cell,-1,r=2,0.5\n");
    }

    #[test]
    fn exact_failures_ignore_measured() {
        let mut r = sample();
        r.checks.push(CheckRecord::bounded("m", 1.0, 2.0));
        assert!(r.exact_failures().is_empty());
        r.checks.push(CheckRecord::failures("e", 1));
        assert_eq!(r.exact_failures().len(), 1);
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let err = sample().emit(Path::new("/proc/definitely/not/here"), Format::Both).unwrap_err();
        assert!(err.to_string().contains("/proc/definitely/not/here"));
    }
}
