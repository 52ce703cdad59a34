use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use localfield::verify::{CheckGroup, Format, HarnessConfig, Srt};
use localfield::{FieldConfig, Mode, Window};
use serde::Deserialize;

pub const WINDOW_CAP: u128 = 65536;

/// The config file: every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub field: Option<FieldConfig>,
    pub window: Option<Window>,
    pub corpus: Option<CorpusFile>,
    pub checks: Option<Vec<CheckGroup>>,
    pub truncations: Option<Vec<i64>>,
    pub parameters: Option<ParametersFile>,
    pub output: Option<OutputFile>,
    pub stability_factor: Option<f64>,
    pub oracle_sample: Option<usize>,
    pub override_window_cap: Option<bool>,
    pub timings: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFile {
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub kernel_resolutions: Option<Vec<u32>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersFile {
    pub r: Option<Vec<f64>>,
    pub srt: Option<Vec<Srt>>,
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    pub directory: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Values given on the command line; each one overrides the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub p: Option<u32>,
    pub window: Option<Window>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub checks: Option<Vec<CheckGroup>>,
    pub k: Option<Vec<i64>>,
    pub r: Option<Vec<f64>>,
    pub srt: Option<Vec<Srt>>,
    pub lambda: Option<Vec<f64>>,
    pub override_window_cap: bool,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub harness: HarnessConfig,
    pub out_dir: PathBuf,
    pub format: Format,
    pub override_window_cap: bool,
}

impl RunConfig {
    pub fn field(&self) -> FieldConfig {
        self.harness.field
    }

    pub fn window(&self) -> Window {
        self.harness.corpus.window
    }
}

/// Parses JSON, or TOML when the extension is `.toml`, reporting the key
/// path of the first offending entry.
pub fn load_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_text(&text, path.extension().is_some_and(|e| e == "toml"))
        .with_context(|| format!("in config {}", path.display()))
}

pub fn parse_text(text: &str, toml: bool) -> Result<ConfigFile> {
    if toml {
        let de = toml::Deserializer::parse(text)?;
        serde_path_to_error::deserialize(de).map_err(|e| anyhow::anyhow!("{}: {}", e.path(), e.inner()))
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| anyhow::anyhow!("{}: {}", e.path(), e.inner()))
    }
}

/// Defaults, then the file, then the flags.
pub fn resolve(file: ConfigFile, flags: &Overrides) -> Result<RunConfig> {
    let mut h = HarnessConfig::default();
    let field = file.field.unwrap_or(h.field);
    let mode = flags.mode.unwrap_or(field.mode());
    let p = flags.p.unwrap_or(field.p());
    h.field = FieldConfig::new(mode, p)?;
    let corpus = file.corpus.unwrap_or_default();
    h.corpus.window = flags.window.or(file.window).unwrap_or(h.corpus.window);
    h.corpus.seed = flags.seed.or(corpus.seed).unwrap_or(h.corpus.seed);
    h.corpus.count = flags.count.or(corpus.count).unwrap_or(h.corpus.count);
    h.corpus.kernel_resolutions = corpus.kernel_resolutions.unwrap_or(h.corpus.kernel_resolutions);
    h.checks = flags.checks.clone().or(file.checks).unwrap_or(h.checks);
    h.k_list = flags.k.clone().or(file.truncations).unwrap_or(h.k_list);
    let params = file.parameters.unwrap_or_default();
    h.r_list = flags.r.clone().or(params.r).unwrap_or(h.r_list);
    h.srt_list = flags.srt.clone().or(params.srt).unwrap_or(h.srt_list);
    h.lambda_list = flags.lambda.clone().or(params.lambda).unwrap_or(h.lambda_list);
    h.stability_factor = file.stability_factor.unwrap_or(h.stability_factor);
    h.oracle_sample = file.oracle_sample.unwrap_or(h.oracle_sample);
    h.record_timings = flags.timings || file.timings.unwrap_or(false);
    let output = file.output.unwrap_or_default();
    let override_window_cap = flags.override_window_cap || file.override_window_cap.unwrap_or(false);
    let w = h.corpus.window;
    Window::new(w.a, w.l)?;
    let cells = (h.field.q() as u128).checked_pow((w.l - w.a) as u32).unwrap_or(u128::MAX);
    if cells > WINDOW_CAP && !override_window_cap {
        bail!("window ({}, {}) has {cells} cells, above the cap of {WINDOW_CAP}; pass --override-window-cap", w.a, w.l);
    }
    h.validate()?;
    Ok(RunConfig {
        harness: h,
        out_dir: flags.out.clone().or(output.directory).unwrap_or_else(|| PathBuf::from("out")),
        format: flags.format.or(output.format).unwrap_or(Format::Both),
        override_window_cap,
    })
}

fn split(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let (a, l) = s.split_once(':').ok_or_else(|| format!("expected A:L, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("support scale {a:?}: {e}"))?;
    let l = l.trim().parse().map_err(|e| format!("resolution scale {l:?}: {e}"))?;
    Window::new(a, l).map_err(|e| e.to_string())
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    split(s).map(|x| x.parse::<T>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

pub fn parse_srt_list(s: &str) -> Result<Vec<Srt>, String> {
    split(s)
        .map(|item| {
            let parts: Vec<f64> = parse_list(&item.replace(':', ","))?;
            match parts[..] {
                [s, r, t] => Ok(Srt { s, r, t }),
                _ => Err(format!("expected s:r:t, got {item:?}")),
            }
        })
        .collect()
}

pub fn parse_checks(s: &str) -> Result<Vec<CheckGroup>, String> {
    if s.trim() == "all" {
        return Ok(CheckGroup::ALL.to_vec());
    }
    parse_list(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let rc = resolve(parse_text("{}", false).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(rc.harness, HarnessConfig::default());
        assert_eq!(rc.field(), FieldConfig::padic(2).unwrap());
        assert_eq!(rc.window(), Window { a: -3, l: 3 });
        assert_eq!(rc.harness.corpus.seed, 42);
        assert_eq!(rc.harness.checks, CheckGroup::ALL.to_vec());
    }

    #[test]
    fn non_prime_p_rejected_with_path() {
        let err = parse_text(r#"{"field": {"mode": "padic", "p": 4}}"#, false).unwrap_err().to_string();
        assert!(err.contains("p must be prime"), "{err}");
        assert!(err.contains("field"), "{err}");
        let err = resolve(ConfigFile::default(), &Overrides { p: Some(4), ..Overrides::default() }).unwrap_err();
        assert!(err.to_string().contains("p must be prime"));
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let err = parse_text(r#"{"corpus": {"seed": 1, "sede": 2}}"#, false).unwrap_err().to_string();
        assert!(err.contains("corpus") && err.contains("sede"), "{err}");
        let err = parse_text(r#"{"checks": ["fourier", "nope"]}"#, false).unwrap_err().to_string();
        assert!(err.contains("checks[1]"), "{err}");
    }

    #[test]
    fn flag_overrides_file() {
        let file = parse_text("[corpus]\nseed = 7\ncount = 9\n", true).unwrap();
        let rc = resolve(file, &Overrides { seed: Some(11), ..Overrides::default() }).unwrap();
        assert_eq!(rc.harness.corpus.seed, 11);
        assert_eq!(rc.harness.corpus.count, 9);
    }

    #[test]
    fn window_cap_and_override() {
        let big = Overrides { window: Some(Window { a: -9, l: 8 }), ..Overrides::default() };
        assert!(resolve(ConfigFile::default(), &big).unwrap_err().to_string().contains("cap"));
        let ok = Overrides { override_window_cap: true, ..big };
        assert!(resolve(ConfigFile::default(), &ok).unwrap().override_window_cap);
    }

    #[test]
    fn list_parsers() {
        assert_eq!(parse_window("-3:3").unwrap(), Window { a: -3, l: 3 });
        assert!(parse_window("3:-3").is_err());
        assert_eq!(parse_list::<i64>("-3,-2, 0").unwrap(), vec![-3, -2, 0]);
        assert_eq!(parse_srt_list("0.5:2:2,1:1.5:3").unwrap()[1], Srt { s: 1.0, r: 1.5, t: 3.0 });
        assert!(parse_srt_list("1:2").is_err());
        assert_eq!(parse_checks("all").unwrap().len(), 10);
        assert_eq!(parse_checks("cz,lp").unwrap(), vec![CheckGroup::Cz, CheckGroup::Lp]);
    }
}
