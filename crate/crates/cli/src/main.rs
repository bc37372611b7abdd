//! `zakharov`: dnoidal and solitary traveling waves of the Zakharov system.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use zakharov_core::dynamics::Integrator;
use zakharov_core::Error;

#[derive(Debug, Parser)]
#[command(name = "zakharov", version, about = "Periodic and solitary traveling waves of the Zakharov system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one dnoidal wave and write its sampled profiles.
    Construct(ConstructArgs),
    /// Tabulate the family over a geometric grid of nu.
    Sweep(SweepArgs),
    /// Eigenvalues of L3, L4 or the Lamé operator, with a verdict.
    Spectrum(SpectrumArgs),
    /// Evolve a dnoidal wave, optionally perturbed.
    Evolve(EvolveArgs),
    /// Perturbed dnoidal run; seed and delta are required.
    Stability(StabilityArgs),
    /// Evolve the periodized sech wave.
    Solitary(SolitaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Data file; the summary then goes to stdout instead of stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    /// Fundamental period.
    #[arg(long = "L")]
    pub l: f64,
    /// Speed, |c| < 1.
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long)]
    pub nu: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long = "nu-min")]
    pub nu_min: f64,
    #[arg(long = "nu-max")]
    pub nu_max: f64,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    #[value(name = "L3")]
    L3,
    #[value(name = "L4")]
    L4,
    #[value(name = "lame")]
    Lame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Semiperiodic,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long = "L", requires = "nu")]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, requires = "l")]
    pub nu: Option<f64>,
    /// Lamé modulus; overrides the wave's own.
    #[arg(long, conflicts_with_all = ["l", "nu"])]
    pub k: Option<f64>,
    #[arg(long, value_enum, default_value = "L3")]
    pub operator: OperatorKind,
    /// Number of eigenvalues to report.
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    /// Collocation points.
    #[arg(long = "N", default_value_t = 512)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "periodic")]
    pub boundary: BoundaryArg,
    /// Include eigenvectors in JSON output.
    #[arg(long = "with-vectors")]
    pub with_vectors: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long = "N", default_value_t = 256)]
    pub n: usize,
    /// Time step; defaults to 1e-4 (L/2pi)^2 (256/N)^2.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end", default_value_t = 5.0)]
    pub t_end: f64,
    #[arg(long = "save-interval", default_value_t = 0.05)]
    pub save_interval: f64,
    #[arg(long, default_value = "rk4", value_parser = parse_integrator)]
    pub integrator: Integrator,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Zero a positive mean of the v perturbation.
    #[arg(long = "respect-mean-condition")]
    pub respect_mean_condition: bool,
    /// Rescale u0 to the L2 norm of phi.
    #[arg(long)]
    pub renormalize: bool,
    /// Write the final fields as raw f64 plus a JSON sidecar.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// Wave document written by `construct --format json`.
    #[arg(long = "wave-file", conflicts_with_all = ["l", "nu"], required_unless_present_all = ["l", "nu"])]
    pub wave_file: Option<PathBuf>,
    #[arg(long = "L", requires = "nu")]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, requires = "l")]
    pub nu: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolitaryArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Box length in units of the sech width.
    #[arg(long = "box-factor", default_value_t = 80.0)]
    pub box_factor: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

fn parse_integrator(s: &str) -> Result<Integrator, Error> {
    s.parse()
}

/// Everything that ends a run early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verdict(_) => 3,
            Failure::Core(e) => match e {
                Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => 1,
                Error::Domain(_) | Error::NoSolution(_) => 2,
                Error::Accuracy(_) | Error::RankDeficient(_) => 3,
                Error::BlowUp { .. } => 4,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Verdict(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true).allow_negative_numbers(true));
    let cli = match cmd.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
