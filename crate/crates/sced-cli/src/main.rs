//! Command-line front end for the subcode ensemble decoding laboratory.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical or
//! construction failure. Progress goes to stderr; machine-readable
//! output goes to files and stdout.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd_build;
mod cmd_collect;
mod cmd_curve;
mod cmd_simulate;
mod cmd_verify;
mod common;
mod config;
mod error;

use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "sced",
    about = "Subcode ensemble decoding laboratory",
    version
)]
struct Cli {
    /// Worker threads for frame/candidate parallelism. Results never
    /// depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte-Carlo FER campaign.
    Simulate(cmd_simulate::SimulateArgs),
    /// Accumulate base-decoder error frames.
    CollectFrames(cmd_collect::CollectArgs),
    /// Generate a candidate pool, evaluate coverage, select greedily.
    BuildEnsemble(cmd_build::BuildArgs),
    /// Check covering, 4-cycle and dimension properties of a pool.
    Verify(cmd_verify::VerifyArgs),
    /// Recompute the greedy coverage curve from saved records.
    CoverageCurve(cmd_curve::CurveArgs),
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Usage(format!("rayon pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(args) => cmd_simulate::run(args),
        Command::CollectFrames(args) => cmd_collect::run(args),
        Command::BuildEnsemble(args) => cmd_build::run(args),
        Command::Verify(args) => cmd_verify::run(args),
        Command::CoverageCurve(args) => cmd_curve::run(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version to stdout with success status.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sced: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
