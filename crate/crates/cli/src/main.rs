mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use localfield::verify::{CheckGroup, Format, Srt};
use localfield::{Mode, Window};

use config::{parse_checks, parse_list, parse_srt_list, parse_window, Overrides};

#[derive(Parser, Debug)]
#[command(name = "localfield", version, about = "Singular integrals and function spaces on local fields")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// JSON or TOML run config; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Support and resolution scales, e.g. -3:3.
    #[arg(long, global = true, value_name = "A:L", allow_hyphen_values = true, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of corpus functions.
    #[arg(long, global = true)]
    count: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Comma-separated check groups, or "all".
    #[arg(long, global = true, value_parser = parse_checks)]
    checks: Option<::std::vec::Vec<CheckGroup>>,
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_list::<i64>)]
    k: Option<::std::vec::Vec<i64>>,
    #[arg(long, global = true, value_parser = parse_list::<f64>)]
    r: Option<::std::vec::Vec<f64>>,
    /// Comma-separated s:r:t triples.
    #[arg(long, global = true, value_parser = parse_srt_list)]
    srt: Option<::std::vec::Vec<Srt>>,
    #[arg(long, global = true, value_parser = parse_list::<f64>)]
    lambda: Option<::std::vec::Vec<f64>>,
    #[arg(long, global = true)]
    override_window_cap: bool,
    /// Record wall-clock timings in the report (breaks byte reproducibility).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Padic,
    Laurent,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fourier transform of a serialized function (or the inverse of a spectral one).
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Truncated singular integral T_k f.
    ApplyTk {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        kernel: PathBuf,
        /// Truncation level; defaults to the first entry of --k.
        #[arg(long = "level", allow_hyphen_values = true)]
        level: Option<i64>,
    },
    /// Calderón–Zygmund decomposition of a nonnegative function.
    CzDecompose {
        #[arg(long)]
        input: PathBuf,
        /// Level; defaults to the first entry of --lambda.
        #[arg(long = "level")]
        level: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        start_scale: Option<i64>,
    },
    /// L^r, Besov and Triebel–Lizorkin norms of a function.
    Norms {
        #[arg(long)]
        input: PathBuf,
    },
    /// Atomic decomposition of an angular kernel.
    Atoms {
        #[arg(long)]
        kernel: PathBuf,
    },
    /// The full verification harness.
    Verify,
    /// Fast against naive transform timings.
    Bench {
        /// Largest window depth l − a to time.
        #[arg(long, default_value_t = 8)]
        max_depth: u32,
    },
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode.map(|m| match m {
                ModeArg::Padic => Mode::Padic,
                ModeArg::Laurent => Mode::Laurent,
            }),
            p: self.p,
            window: self.window,
            seed: self.seed,
            count: self.count,
            out: self.out.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
                FormatArg::Both => Format::Both,
            }),
            checks: self.checks.clone(),
            k: self.k.clone(),
            r: self.r.clone(),
            srt: self.srt.clone(),
            lambda: self.lambda.clone(),
            override_window_cap: self.override_window_cap,
            timings: self.timings,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
