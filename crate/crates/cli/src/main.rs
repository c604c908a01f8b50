//! `sadic` command-line front end.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact analysis of digit-restricted s-adic fractal sets.
#[derive(Debug, Parser)]
#[command(name = "sadic", version, about)]
pub struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimension from the Moran equation.
    Dim(DimArgs),
    /// Endpoints and diameter of a cylinder.
    Cylinder(CylinderArgs),
    /// Gap intervals between sibling cylinders of S_(s,0).
    Gaps(GapsArgs),
    /// Digits and value of an element given by blocks.
    Generate(GenerateArgs),
    /// Box-counting slope of a cylinder cover.
    Boxcount(BoxcountArgs),
    /// Covering-stage lengths lambda(E_k).
    Measure(MeasureArgs),
    /// Digit frequencies of an eventually periodic expansion.
    Freq(FreqArgs),
    /// Whether S_(s,u) can contain normal numbers.
    Normal(NormalArgs),
    /// Run the acceptance criteria.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SetArgs {
    /// Radix.
    #[arg(long)]
    pub s: Option<u32>,
    /// Marker digit.
    #[arg(long)]
    pub u: Option<u32>,
    /// Alphabet: a JSON file, `sprime3`, `tilde:S` or `blocks:S:U`.
    #[arg(long, conflicts_with_all = ["s", "u"])]
    pub alphabet: Option<String>,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CylinderArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub u: u32,
    /// Block values, e.g. `1,2` or `12`; empty for the whole set.
    #[arg(long, default_value = "")]
    pub base: String,
}

#[derive(Debug, Args)]
pub struct GapsArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long, default_value = "")]
    pub base: String,
    /// Only this gap index (1..=s-2).
    #[arg(long)]
    pub p: Option<u32>,
    /// Also search every block prefix of this many blocks for elements in each gap.
    #[arg(long)]
    pub audit_depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long)]
    pub u: u32,
    /// Leading blocks.
    #[arg(long, default_value = "")]
    pub blocks: String,
    /// Periodic tail of blocks; omit for a finite word.
    #[arg(long)]
    pub tail: Option<String>,
    /// Draw this many leading blocks at random instead.
    #[arg(long, conflicts_with = "blocks")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = sadic::reproduce::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoxcountArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Digit depth of the cylinder cover.
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    /// Exponents j of the box sizes s^-j, e.g. `4..10` or `4,6,8`.
    #[arg(long, default_value = "4..10")]
    pub scales: String,
    /// Coarsest scales left out of the fit (default: 2 when at least 5 scales).
    #[arg(long)]
    pub drop: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub s: u32,
    #[arg(long, default_value_t = 0)]
    pub u: u32,
    /// Last stage.
    #[arg(long)]
    pub k: usize,
    /// Cap on stage size in denominator bits.
    #[arg(long, default_value_t = sadic::measure::DEFAULT_BIT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct FreqArgs {
    #[arg(long)]
    pub s: u32,
    /// Marker digit for the block identity check.
    #[arg(long)]
    pub u: Option<u32>,
    /// Digits before the period.
    #[arg(long, default_value = "")]
    pub pre: String,
    /// Repeating digits; omit for a finite word.
    #[arg(long)]
    pub period: Option<String>,
    /// Prefix length.
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct NormalArgs {
    #[arg(long)]
    pub s: u32,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Run one group: dimension, cylinder, measure, normality or codec.
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long, default_value_t = sadic::reproduce::DEFAULT_SEED)]
    pub seed: u64,
    /// Allowed box-count deviation.
    #[arg(long, default_value_t = 0.05)]
    pub box_tol: f64,
    /// Ignore the per-criterion time limits.
    #[arg(long)]
    pub no_time_limits: bool,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid input or a failed check: exit 1.
    Domain(String),
    /// A size budget was exceeded: exit 2.
    Resource(String),
}

impl From<sadic::Error> for CliError {
    fn from(e: sadic::Error) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SADIC_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Domain(format!("SADIC_WORKERS={raw:?} is not a worker count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Domain(format!("cannot start {n} workers: {e}")))
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Domain(format!("cannot write output: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_workers().and_then(|_| commands::dispatch(&cli)).and_then(|report| {
        emit(&cli, &report.text)?;
        match report.failure {
            Some(msg) => Err(CliError::Domain(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
