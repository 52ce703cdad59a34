use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localfield")).args(args).output().expect("binary runs")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn values(v: &Value) -> Vec<f64> {
    v["values"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|z| z.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect()
}

#[test]
fn norms_of_phi_d_are_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "phi.json", r#"{"a": 0, "l": 0, "values": [[1.0, 0.0]]}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "norms",
        "--input",
        input.to_str().unwrap(),
        "--srt",
        "1:2:2",
        "--r",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports = read(&out.join("norms.json"));
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{r}");
    }
    let spaces: Vec<&str> = reports.iter().map(|r| r["space"].as_str().unwrap()).collect();
    assert_eq!(spaces, ["L", "B", "F"]);
}

#[test]
fn apply_tk_matches_golden_from_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "apply-tk",
        "--input",
        fixture("tk_input_q2.json").to_str().unwrap(),
        "--kernel",
        fixture("tk_kernel_q2.json").to_str().unwrap(),
        "--level",
        "-1",
        "--window",
        "-3:3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = read(&dir.path().join("apply_tk.json"));
    let golden = read(&fixture("tk_golden_q2.json"));
    assert_eq!((got["a"].clone(), got["l"].clone()), (golden["a"].clone(), golden["l"].clone()));
    let (g, e) = (values(&got), values(&golden));
    assert_eq!(g.len(), e.len());
    for (x, y) in g.iter().zip(&e) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn transform_and_inverse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let input = fixture("tk_input_q2.json");
    assert!(run(&["transform", "--input", input.to_str().unwrap(), "--out", d]).status.success());
    let spec = dir.path().join("transform.json");
    assert!(run(&["transform", "--inverse", "--input", spec.to_str().unwrap(), "--out", d]).status.success());
    let back = values(&read(&dir.path().join("inverse.json")));
    for (x, y) in back.iter().zip(values(&read(&input))) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn verify_is_byte_reproducible_and_seed_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "window = { a = -2, l = 2 }\nchecks = [\"fourier\", \"lebesgue\", \"taibleson\"]\n[corpus]\nseed = 7\ncount = 5\nkernel_resolutions = [2]\n",
    );
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push((std::fs::read(out.join("report.json")).unwrap(), std::fs::read(out.join("tables.csv")).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    let v: Value = serde_json::from_slice(&reports[0].0).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["config"]["corpus"]["count"], 5);
}

#[test]
fn non_prime_p_is_rejected() {
    let o = run(&["verify", "--p", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must be prime"));
}

#[test]
fn unknown_config_key_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"parameters": {"r": [2.0], "rr": [3.0]}}"#);
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parameters") && err.contains("rr"), "{err}");
}

#[test]
fn oversize_window_needs_the_override() {
    let o = run(&["verify", "--window", "-9:8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--override-window-cap"));
}

#[test]
fn cz_decompose_checks_clauses_and_rejects_negative_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let good =
        write(dir.path(), "f.json", r#"{"a": 0, "l": 2, "values": [[4.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.5, 0.0]]}"#);
    let o = run(&["cz-decompose", "--input", good.to_str().unwrap(), "--level", "1", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(&dir.path().join("cz.json"));
    assert!(v["report"]["clauses"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    let bad = write(dir.path(), "g.json", r#"{"a": 0, "l": 1, "values": [[-1.0, 0.0], [1.0, 0.0]]}"#);
    assert_eq!(run(&["cz-decompose", "--input", bad.to_str().unwrap(), "--out", d]).status.code(), Some(2));
}

#[test]
fn atoms_of_the_two_cell_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "atoms",
        "--kernel",
        fixture("tk_kernel_q2.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v = read(&dir.path().join("atoms.json"));
    assert_eq!(v["reconstruction_exact"], true);
    assert_eq!(v["h1_upper_bound"], 0.5);
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
}

#[test]
fn bench_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bench", "--max-depth", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(read(&dir.path().join("bench.json")).as_array().unwrap().len(), 4);
}
