//! `soliton`: build, verify, transform and explore soliton profile curves.
//!
//! Exit status: 0 success, 2 no sign change for a root bracket, 3 a
//! residual, boundary or convergence check failed, 64 usage error, 65
//! malformed input, 74 I/O error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;
use soliton_profile::explorer::GridAxis;
use soliton_profile::params::{DEFAULT_ABS_TOL, DEFAULT_REL_TOL, DEFAULT_START_OFFSET};
use soliton_profile::Params;

#[derive(Parser, Debug)]
#[command(name = "soliton", version, about = "Soliton and Einstein profile curves on M^m_k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the Page parameter and build the Einstein profile
    Page(PageArgs),
    /// Solve for the Koiso-Cao parameter and build the soliton profile
    Cao(CaoArgs),
    /// Check a trajectory against the profile equations
    Verify(VerifyArgs),
    /// Report which of the three symmetric cases a trajectory falls in
    Classify(ClassifyArgs),
    /// Apply t -> T - t to a trajectory
    Invert(InvertArgs),
    /// Reconstruct t(r) from dt/dr = 2 phi / (k r)
    Radial(RadialArgs),
    /// Shoot from one left-endpoint start (x0, y0)
    Shoot(ShootArgs),
    /// Shoot from every node of an (x0, y0) grid
    Scan(ScanArgs),
    /// Newton refinement of a start towards a closing profile
    Refine(RefineArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[arg(long, default_value_t = DEFAULT_ABS_TOL)]
    abs_tol: f64,
    /// Distance from the singular endpoint at which integration starts
    #[arg(long, default_value_t = DEFAULT_START_OFFSET)]
    start_offset: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<Params, CliError> {
        Params::new(self.m, self.k)
            .and_then(|p| p.with_tolerances(self.rel_tol, self.abs_tol))
            .and_then(|p| p.with_start_offset(self.start_offset))
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Directory for the output files; without it a summary goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trajectory file format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Trajectory file (CSV or JSON)
    file: PathBuf,
    /// Required for CSV input; must match the metadata for JSON input
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Input format; guessed from the file extension when omitted
    #[arg(long, value_enum)]
    input_format: Option<Format>,
}

#[derive(Args, Debug)]
struct PageArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ObjectiveArg {
    #[value(name = "quadrature_J")]
    QuadratureJ,
    #[value(name = "paper_S")]
    MomentS,
}

#[derive(Args, Debug)]
struct CaoArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Root objective for the parameter a
    #[arg(long, value_enum, default_value_t = ObjectiveArg::QuadratureJ)]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Pass threshold for the sup-norms of the equation residuals
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Directory for residuals.csv and metadata.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RadialArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1e-6)]
    r_min: f64,
    #[arg(long, default_value_t = 1e6)]
    r_max: f64,
    /// Number of log-spaced radii
    #[arg(long, default_value_t = 601)]
    points: usize,
    /// Radius at which t is the midpoint of the interval
    #[arg(long, default_value_t = 1.0)]
    anchor: f64,
    /// Directory for radial.csv and metadata.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ShootArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    y0: f64,
    /// Integration horizon; defaults to 10 log((m+k)/(m-k))
    #[arg(long)]
    t_max: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// x0 axis as lo:hi:n
    #[arg(long, allow_hyphen_values = true)]
    x0: GridAxis,
    /// y0 axis as lo:hi:n
    #[arg(long, allow_hyphen_values = true)]
    y0: GridAxis,
    #[arg(long)]
    t_max: Option<f64>,
    /// Shoot on the calling thread only
    #[arg(long)]
    serial: bool,
    /// Directory for scan.csv and metadata.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RefineArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    y0: f64,
    #[arg(long, default_value_t = 25)]
    max_iter: usize,
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] soliton_profile::Error),
    /// Outputs were written but a check failed.
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use soliton_profile::Error as E;
        match self {
            CliError::Usage(_) => 64,
            CliError::Failed(_) => 3,
            CliError::Io { .. } => 74,
            CliError::Core(e) => match e {
                E::NoBracket { .. } => 2,
                E::InvalidRoot(_) | E::NoConvergence { .. } | E::SingularPhi { .. } | E::StepFailure { .. } => 3,
                E::InvalidParams(_) => 64,
                E::Parse(_) => 65,
                E::Io(_) => 74,
            },
        }
    }
}

fn init_logging() {
    let level = match std::env::var("SOLITON_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("debug") => LevelFilter::Debug,
        Ok("info") | Err(_) => LevelFilter::Info,
        Ok(other) => {
            eprintln!("warning: SOLITON_LOG={other:?} not one of quiet, info, debug; using info");
            LevelFilter::Info
        }
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging();
    let result = match cli.command {
        Command::Page(a) => commands::page(a),
        Command::Cao(a) => commands::cao(a),
        Command::Verify(a) => commands::verify(a),
        Command::Classify(a) => commands::classify(a),
        Command::Invert(a) => commands::invert(a),
        Command::Radial(a) => commands::radial(a),
        Command::Shoot(a) => commands::shoot(a),
        Command::Scan(a) => commands::scan(a),
        Command::Refine(a) => commands::refine(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
