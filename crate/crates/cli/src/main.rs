//! qgame: load static quantum game definitions, evaluate payoffs along both
//! routes, run the certified solvers, and reproduce the construction-level
//! verification suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
mod format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

impl CliError {
    fn with_context(self, context: &str) -> Self {
        match self {
            CliError::Io(m) => CliError::Io(format!("{context}: {m}")),
            CliError::Parse(m) => CliError::Parse(format!("{context}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{context}: {m}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ZeroSum,
    Nash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyWhat {
    /// Exhaustive diagonal-structure check of the diagonal game's tensor.
    Theorem3,
    /// Randomized dual-path agreement and payoff-reality sweep.
    Reality,
    /// Classical-embedding fidelity against the bilinear payoff.
    Embedding,
    /// Constructive witness search plus the strategy-set dimension count.
    Nonredundancy,
}

/// Static quantum games: describe, evaluate, solve, verify.
///
/// Exit codes: 0 success/converged, 2 validation failure, 3 solver
/// non-convergence, 4 verification failure.
#[derive(Parser)]
#[command(name = "qgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a game file and print its dimensions and residuals.
    Describe {
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Evaluate per-player payoffs for strategy files, along both routes.
    Payoff {
        game: PathBuf,
        /// One strategy file per player (chi matrix or Kraus list).
        #[arg(required = true)]
        strategies: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run the zero-sum saddle solver or the Nash best-response dynamics.
    Solve {
        game: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Gap / residual tolerance (default 1e-3 zero-sum, 1e-4 nash).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iter", default_value_t = 100_000)]
        max_iter: usize,
        /// Initialization seed; 0 starts from the depolarizing profile.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the machine-readable result file here (atomically).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run a property-verification suite and report pass/fail per check.
    Verify {
        what: VerifyWhat,
        /// Per-player dimension for theorem3 / nonredundancy / reality.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Optional game file for the reality sweep.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Print the qubit-versus-bit efficiency table for q = 1..=Q.
    Efficiency {
        q: u32,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Describe { game, format } => commands::describe(game, *format),
        Command::Payoff {
            game,
            strategies,
            format,
        } => commands::payoff(game, strategies, *format),
        Command::Solve {
            game,
            mode,
            tol,
            max_iter,
            seed,
            out,
            format,
        } => commands::solve(&commands::SolveArgs {
            game: game.clone(),
            mode: *mode,
            tol: *tol,
            max_iter: *max_iter,
            seed: *seed,
            out: out.clone(),
            format: *format,
        }),
        Command::Verify {
            what,
            n,
            path,
            seed,
            format,
        } => commands::run_verify(*what, *n, path.as_deref(), *seed, *format),
        Command::Efficiency { q, format } => commands::efficiency(*q, *format),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
