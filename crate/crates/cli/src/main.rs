//! `piterbarg` command-line front end.
//!
//! Exit codes: 0 ok, 2 usage / configuration, 3 numerical failure,
//! 4 acceptance predicates failed.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use piterbarg::Error;

#[derive(Parser, Debug)]
#[command(name = "piterbarg", version, about = "Joint maxima of Gaussian processes over continuous time and grids")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "PITERBARG_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate a Pickands-type constant; CSV on stdout or --out.
    Constants(ConstantsArgs),
    /// Dump simulated paths as CSV.
    Simulate(SimulateArgs),
    /// Run a verification experiment from a config file.
    Verify(VerifyArgs),
    /// Convergence sweep over the configured horizon ladder.
    Sweep(VerifyArgs),
    /// Render SVG plots from a report.
    Plot(PlotArgs),
    /// Re-emit a report in canonical form.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(name = "H")]
    H,
    #[value(name = "H_D")]
    HD,
    #[value(name = "H_xy")]
    HXy,
    #[value(name = "H_D1D2")]
    HD1D2,
    #[value(name = "H_x_z1z2")]
    HXZ1Z2,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub d1: Option<f64>,
    #[arg(long)]
    pub d2: Option<f64>,
    /// Offset of the continuous maximum.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    /// Offset of the (first) grid maximum; `y` of `H_xy`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z2: f64,
    #[arg(long, default_value_t = 64.0)]
    pub lambda: f64,
    #[arg(long)]
    pub mesh: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `lo:hi:step`; one row per value of the first offset argument
    /// (`x`, or `z1` for `H_D1D2`), all rows on common paths.
    #[arg(long, allow_hyphen_values = true)]
    pub offsets_lattice: Option<String>,
    /// Run config whose `estimation` section overrides lambda/mesh/reps/seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long)]
    pub mesh: f64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulate fractional Brownian motion with Hurst index alpha/2 instead.
    #[arg(long)]
    pub fbm: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub config: PathBuf,
    /// Validate the configuration only.
    #[arg(long)]
    pub dry_run: bool,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    pub report: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    pub report: PathBuf,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command with its exit code.
pub enum Failure {
    Lib(Error),
    Usage(String),
    Acceptance(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::ConfigMismatch(_)
        | Error::UnclassifiableGrid(_)
        | Error::EqualSpacings(_)
        | Error::GridMeshMismatch { .. }
        | Error::InvalidHorizon { .. }
        | Error::MalformedReport(_)
        | Error::Json(_) => 2,
        _ => 3,
    }
}

fn report_failure(f: Failure) -> ExitCode {
    let (kind, message, code) = match f {
        Failure::Lib(e) => (e.kind().to_string(), e.to_string(), exit_code(&e)),
        Failure::Usage(m) => ("Usage".to_string(), m, 2),
        Failure::Acceptance(v) => ("AcceptanceFailed".to_string(), v.join("; "), 4),
    };
    let obj = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{obj}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return report_failure(Failure::Usage(first.to_string()));
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            return report_failure(Failure::Usage("--workers must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return report_failure(Failure::Usage(format!("thread pool: {e}")));
        }
    }
    let result = match cli.command {
        Command::Constants(a) => commands::constants(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Verify(a) => commands::verify(&a, false),
        Command::Sweep(a) => commands::verify(&a, true),
        Command::Plot(a) => commands::plot(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_failure(f),
    }
}
