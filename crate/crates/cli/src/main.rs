use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cstar_approx_cli::commands::SolveArgs;
use cstar_approx_cli::{run_delta, run_solve, run_verify, CliError};

/// Distances to subspaces of finite-dimensional C*-algebras, with dual
/// certificates that can be checked independently.
///
/// CSTAR_APPROX_THREADS is reserved and currently ignored.
#[derive(Parser)]
#[command(name = "cstar-approx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write a report.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides options.tol from the problem file.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides options.seed from the problem file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a report's certificate against the problem file.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Print the essential shift norm of a tail problem.
    Delta {
        #[arg(long)]
        input: PathBuf,
    },
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Solve {
            input,
            output,
            tol,
            seed,
        } => {
            let out = run_solve(&SolveArgs {
                input,
                output,
                tol,
                seed,
            })?;
            let r = &out.report;
            println!("distance = {}", r.distance);
            if let Some(i) = r.interval {
                println!("interval = [{}, {}]", i.lo, i.hi);
            }
            println!("gap = {}", r.gap);
            println!("converged = {}", r.converged);
            Ok(out.exit_code)
        }
        Command::Verify { input, report } => {
            let out = run_verify(&input, &report)?;
            println!("lower_bound = {}", out.lower_bound);
            println!("gap = {}", out.gap);
            println!("feasible = {}", out.feasible);
            println!(
                "{}",
                if out.accepted {
                    "certificate accepted"
                } else {
                    "certificate rejected"
                }
            );
            Ok(out.exit_code)
        }
        Command::Delta { input } => {
            let out = run_delta(&input)?;
            println!("delta = {}", out.delta);
            if let (Some(i), Some(strict)) = (out.distance, out.strict) {
                println!("distance in [{}, {}]", i.lo, i.hi);
                println!("delta < distance: {strict}");
            }
            Ok(cstar_approx_cli::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
