//! Command-line front end: JSON instance files in, JSON results and CSV curve tables
//! out.
//!
//! Every subcommand is a pure function of its arguments returning the text written to
//! stdout; failures carry an exit code (2 parse, 3 cap, 4 domain) and render as JSON on
//! stderr.

pub mod canon;
pub mod commands;
mod error;
pub mod schema;

use std::path::{Path, PathBuf};

use cics_core::Method;
use clap::{Parser, Subcommand};

pub use error::{CliError, ErrorKind};
pub use schema::{InstanceFile, Loaded};

#[derive(Debug, Parser)]
#[command(name = "cics", version, about = "Costly-information combinatorial selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Root index and variant parameters of every alternative.
    Index { file: PathBuf },
    /// Breakpoint table `y,f,slope` of one alternative's optimality curve.
    Curve {
        file: PathBuf,
        #[arg(long)]
        alt: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Atoms of one alternative's surrogate distribution.
    Surrogate {
        file: PathBuf,
        #[arg(long)]
        alt: usize,
    },
    /// Index-policy value under commitments (default: each variant's rule).
    Eval {
        file: PathBuf,
        /// JSON array with one entry per alternative: "rule" or {"node id": "label"}.
        #[arg(long)]
        commit: Option<String>,
        /// Monte Carlo as SEED,REPS instead of exact evaluation.
        #[arg(long)]
        mc: Option<String>,
        /// Slack used by the optional-inspection grab rule.
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
    },
    /// Optimal adaptive value by backward induction.
    Opt { file: PathBuf },
    /// Commitment gap and the best deterministic commitment tuple.
    Gap { file: PathBuf },
    /// Checks a local (default), pointwise or semilocal approximation of one alternative.
    Verify {
        file: PathBuf,
        #[arg(long)]
        alt: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, conflicts_with = "semilocal")]
        pointwise: bool,
        /// BETA,P for the optional-inspection semilocal check.
        #[arg(long, value_name = "BETA,P")]
        semilocal: Option<String>,
        #[arg(long)]
        commit: Option<String>,
    },
    /// Randomized grab-or-open composition for optional-inspection boxes.
    ComposeSemilocal {
        file: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        mc: Option<String>,
    },
}

/// Reads and builds an instance file.
///
/// # Errors
///
/// I/O, JSON or schema errors (parse) and invalid instances.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    InstanceFile::parse(&text)?.load()
}

fn method(mc: Option<&str>) -> Result<Method, CliError> {
    mc.map_or(Ok(Method::Exact), commands::parse_mc)
}

/// Runs one command and returns its stdout text.
///
/// # Errors
///
/// Any [`CliError`]; the caller maps it to an exit code.
pub fn run(cmd: &Command) -> Result<String, CliError> {
    let json = |v: serde_json::Value| canon::to_string(&v);
    match cmd {
        Command::Index { file } => Ok(json(commands::index(&load(file)?)?)),
        Command::Curve { file, alt, out } => {
            let csv = commands::curve_csv(&load(file)?, *alt)?;
            match out {
                Some(path) => {
                    std::fs::write(path, &csv).map_err(|e| CliError::domain(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(csv),
            }
        }
        Command::Surrogate { file, alt } => Ok(json(commands::surrogate(&load(file)?, *alt)?)),
        Command::Eval { file, commit, mc, beta } => {
            let l = load(file)?;
            Ok(json(commands::eval(
                &l,
                commit.as_deref(),
                method(mc.as_deref())?,
                *beta,
            )?))
        }
        Command::Opt { file } => Ok(json(commands::opt(&load(file)?)?)),
        Command::Gap { file } => Ok(json(commands::gap(&load(file)?)?)),
        Command::Verify {
            file,
            alt,
            alpha,
            pointwise,
            semilocal,
            commit,
        } => {
            let check = match (semilocal, pointwise) {
                (Some(spec), _) => {
                    let (beta, p) = commands::parse_pair(spec)?;
                    commands::Check::Semilocal { beta, p }
                }
                (None, true) => commands::Check::Pointwise,
                (None, false) => commands::Check::Local,
            };
            let l = load(file)?;
            Ok(json(commands::verify(&l, *alt, *alpha, check, commit.as_deref(), 0.1)?))
        }
        Command::ComposeSemilocal { file, beta, mc } => {
            let l = load(file)?;
            Ok(json(commands::compose_semilocal(&l, *beta, method(mc.as_deref())?)?))
        }
    }
}
