//! `nodal-lab`: least-energy nodal solutions of sublinear Neumann problems.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
//! numerical step fails or does not converge.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nodal-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize the energy on the constraint set of a domain.
    Solve(commands::SolveArgs),
    /// Shoot the radial Neumann profile on the unit ball.
    Radial(commands::RadialArgs),
    /// Tabulate the radial inequality chain over a range of dimensions.
    Bounds(commands::BoundsArgs),
    /// Recheck a saved field against its report.
    Verify(commands::VerifyArgs),
    /// Continuation in q, warm starting each exponent from the previous one.
    Sweep(commands::SweepArgs),
}

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("NODAL_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(anyhow::anyhow!("NODAL_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    if n == 0 {
        return Err(Failure::Usage(anyhow::anyhow!("NODAL_LAB_THREADS must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Radial(a) => commands::radial(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
