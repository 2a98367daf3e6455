//! The `psi` command line: densities, order estimates, bound verification
//! and limit certificates.
//!
//! Exit codes: 0 success, 1 a check failed or was inapplicable, 2 usage
//! error, 3 numerical non-convergence.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod parse;

pub use commands::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] psi_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<psi_core::ParseError> for CliError {
    fn from(e: psi_core::ParseError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use psi_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_FAIL,
            CliError::Core(e) => match e {
                E::NonConvergence(_) => EXIT_NONCONVERGENCE,
                E::InvalidParameter(_) | E::Parse(_) | E::OutOfDomain { .. } | E::DomainMismatch(_) => EXIT_USAGE,
                E::Precondition(_) | E::NonMonotone { .. } | E::NonPositive { .. } | E::Eval(_) => EXIT_FAIL,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "psi", version, about = "Densities of sets and limits of functions against a scale psi")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper and lower psi-density of a set.
    Density(DensityArgs),
    /// Check 0 <= lower e^psi <= lower psi <= upper psi <= upper e^psi <= 1.
    Chain(DensityArgs),
    /// Order and lower order (optionally type) of a growth function.
    Order(OrderArgs),
    /// Verify the density bounds of one statement.
    Verify(VerifyArgs),
    /// Certify a limit in psi-density from the exceptional sets S_eps.
    LimitDensity(LimitArgs),
    /// Divergence witness and usual-limit upgrade for a function.
    Integrability(IntegrabilityArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON output (the default).
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output of the underlying table.
    #[arg(long)]
    pub csv: bool,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// `a:b,c:d`, geo2, geo:<b>, accel4, accel:<q>, expbumps, bumps, empty, full.
    #[arg(long)]
    pub set: String,
    /// linear, log, loglog, powlog:<p>, neglog1m, exp:<base>.
    #[arg(long, default_value = "log")]
    pub psi: String,
    /// Point r, e.g. 1e24, e^50, 2^81.
    #[arg(long)]
    pub cutoff: String,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Use the exponential lift e^psi.
    #[arg(long)]
    pub lift: bool,
    #[arg(long, default_value_t = psi_core::DEFAULT_TAIL_WINDOW)]
    pub tail_window: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// T as an expression in t.
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: Option<String>,
    /// Zig-zag with orders `l,L` (L may be inf).
    #[arg(long, value_name = "l,L")]
    pub zigzag: Option<String>,
    /// Also estimate the type with respect to this order.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub cutoff: String,
    #[arg(long, default_value_t = psi_core::DEFAULT_TAIL_WINDOW)]
    pub tail_window: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// thm3.1, prop3.2, cor3.3, cor4.1 .. cor4.7, thm1.1.
    #[arg(long)]
    pub id: String,
    /// `key=value,...`; see the README for the keys of each id.
    #[arg(long)]
    pub params: Option<String>,
    /// First function: phi (thm3.1, prop3.2), phi1 (cor3.3) or T (cor4.x, thm1.1).
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: Option<String>,
    #[arg(long, value_name = "l,L")]
    pub zigzag: Option<String>,
    /// Second function: phi2 (cor3.3) or T2 (cor4.5, cor4.6).
    #[arg(long = "fn2", value_name = "EXPR")]
    pub function2: Option<String>,
    #[arg(long, value_name = "l,L")]
    pub zigzag2: Option<String>,
    #[arg(long, default_value = "log")]
    pub psi: String,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub cutoff: String,
    #[arg(long, default_value_t = psi_core::DEFAULT_TAIL_WINDOW)]
    pub tail_window: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    /// Candidate limit, a number or ±inf.
    #[arg(long, allow_hyphen_values = true)]
    pub l: String,
    #[arg(long, default_value = "log")]
    pub psi: String,
    #[arg(long)]
    pub cutoff: String,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Comma separated eps values.
    #[arg(long)]
    pub eps_grid: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    pub threshold: f64,
    /// Also run the dichotomy check on f psi.
    #[arg(long)]
    pub dichotomy: bool,
    #[arg(long, default_value_t = psi_core::DEFAULT_TAIL_WINDOW)]
    pub tail_window: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct IntegrabilityArgs {
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    #[arg(long, default_value = "log")]
    pub psi: String,
    /// Largest r of the averages and of the usual-limit checks.
    #[arg(long)]
    pub rmax: String,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Start of the monotonicity checks.
    #[arg(long, default_value_t = 10.0)]
    pub r1: f64,
    /// Smallest r of the averages.
    #[arg(long, default_value_t = 10.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub per_decade: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `args` (without the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("psi")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn execute(cli: &Cli) -> Result<(i32, String), CliError> {
    let (report, output) = match &cli.command {
        Command::Density(a) => (commands::density(a)?, &a.output),
        Command::Chain(a) => (commands::chain(a)?, &a.output),
        Command::Order(a) => (commands::order(a)?, &a.output),
        Command::Verify(a) => (commands::verify(a)?, &a.output),
        Command::LimitDensity(a) => (commands::limit_density(a)?, &a.output),
        Command::Integrability(a) => (commands::integrability(a)?, &a.output),
    };
    let text = if output.csv { report.to_csv()? } else { report.to_json() };
    let code = if report.ok { EXIT_OK } else { EXIT_FAIL };
    match &output.out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok((code, String::new()))
        }
        None => Ok((code, text)),
    }
}
