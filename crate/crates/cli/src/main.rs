//! `einsum`: validate, evaluate, rewrite and compare einsum expressions.
//!
//! Exit status: 0 on success, 1 on a semantic failure (violations, a rule
//! that does not apply, a counterexample), 2 on usage, parse and input errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use einsum_core::SemiringKind;

use report::Reporter;

#[derive(Parser, Debug)]
#[command(
    name = "einsum",
    version,
    about = "Validate, evaluate, rewrite and compare einsum expressions"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Semiring the entries live in: int, float, bool or tropical.
    #[arg(long, global = true, default_value = "int")]
    semiring: SemiringKind,

    /// JSON file with named tensors: {"A": {"shape": [2, 2], "values": [...]}}.
    #[arg(long, global = true, value_name = "FILE")]
    bindings: Option<PathBuf>,

    /// Random trials for equivalence checks.
    #[arg(long, global = true, default_value_t = 32)]
    trials: usize,

    /// Seed for random trials and sampled shapes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// `human` text or `structured` (one JSON record per line).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check constraints I-III. A bare format string such as `ij,jk->ik` is
    /// checked with operands T1, T2, ... (shapes from --bindings, if given).
    Validate {
        /// Expression text, or @FILE.
        expr: String,
    },
    /// Evaluate an expression on the tensors in --bindings.
    Eval { expr: String },
    /// Apply one named rewrite rule (see `einsum rules`).
    Rewrite {
        expr: String,
        rule: String,
        /// Rule arguments; positions are 1-based.
        args: Vec<String>,
        /// Target subexpression as 1-based operand positions, e.g. `2.1`.
        #[arg(long)]
        at: Option<String>,
        /// Check the result against the input on random bindings.
        #[arg(long)]
        verify: bool,
        /// Axis lengths: `i=3,j=2`, a range `1..4`, or a single length.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Flatten every nested einsum, innermost first.
    Denest {
        expr: String,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        dims: Option<String>,
    },
    /// Compare two expressions on random (or all small) bindings.
    Equiv {
        left: String,
        right: String,
        #[arg(long)]
        dims: Option<String>,
        /// Enumerate every {0,1,2}-valued binding (at most 12 entries).
        #[arg(long)]
        exhaustive: bool,
    },
    /// List rewrite rules and their arguments.
    Rules,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let reporter = Reporter::new(cli.format);
    let result = match &cli.command {
        Command::Validate { expr } => commands::validate(&cli, &reporter, expr),
        Command::Eval { expr } => commands::eval(&cli, &reporter, expr),
        Command::Rewrite {
            expr,
            rule,
            args,
            at,
            verify,
            dims,
        } => commands::rewrite(
            &cli,
            &reporter,
            commands::RewriteRequest {
                expr,
                rule,
                args,
                at: at.as_deref(),
                verify: *verify,
                dims: dims.as_deref(),
            },
        ),
        Command::Denest { expr, verify, dims } => {
            commands::denest(&cli, &reporter, expr, *verify, dims.as_deref())
        }
        Command::Equiv {
            left,
            right,
            dims,
            exhaustive,
        } => commands::equiv(&cli, &reporter, left, right, dims.as_deref(), *exhaustive),
        Command::Rules => commands::rules(&reporter),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            reporter.failure(&failure);
            ExitCode::from(failure.status)
        }
    }
}
