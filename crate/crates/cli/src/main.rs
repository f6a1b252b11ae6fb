//! Command-line surface over the knockdown engines: payoff queries,
//! reference-value checks, lattice solves, Monte Carlo simulation, and
//! numeric bound diagnostics.

mod diagnostics;
mod manifest;
mod parse;
mod payoff;
mod remark42;
mod simulate;
mod solve;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use knockdown::Error;

/// Exit codes: 0 success, 2 validation error, 3 failed check, 4 exhausted
/// iteration or subdivision budget.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "knockdown", version, about = "Exact payoffs, simulation, and equilibrium search for the Knock 'em Down allocation game")]
struct Cli {
    /// Cap the worker thread count without changing any result
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for output files and run manifests
    /// (default: $KNOCKDOWN_OUT, falling back to the working directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact payoff between two strategies (pure inline or @file mixed)
    Payoff(payoff::PayoffArgs),
    /// Recompute the four reference numbers and check them against targets
    #[command(name = "remark42")]
    Remark42(remark42::Remark42Args),
    /// Fictitious play on a lattice grid with an exploitability certificate
    Solve(solve::SolveArgs),
    /// Monte Carlo head-to-head match counts
    Simulate(simulate::SimulateArgs),
    /// Numeric bound checks with printed margins
    Diagnostics(diagnostics::DiagnosticsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads < 1 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_VALIDATION);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not configure {threads} threads: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    let out_dir = manifest::resolve_out_dir(cli.out.as_deref());
    let run = match cli.command {
        Command::Payoff(args) => payoff::run(&args, &out_dir),
        Command::Remark42(args) => remark42::run(&args, &out_dir),
        Command::Solve(args) => solve::run(&args, &out_dir),
        Command::Simulate(args) => simulate::run(&args, &out_dir),
        Command::Diagnostics(args) => diagnostics::run(&args, &out_dir),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Quadrature { .. } => ExitCode::from(EXIT_BUDGET),
                _ => ExitCode::from(EXIT_VALIDATION),
            }
        }
    }
}
