//! `surplus-consensus`: analyze, simulate, sweep and verify surplus-based
//! consensus networks with a uniform communication delay.

mod analyze;
mod args;
mod error;
mod simulate;
mod sweep;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surplus_consensus::Complex64;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "surplus-consensus", version, about)]
struct Cli {
    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Graph facts, spectra of M(0) and M(eps), delay margin and bound.
    Analyze(analyze::AnalyzeArgs),
    /// Integrate the delayed system and write the trajectory.
    Simulate(simulate::SimulateArgs),
    /// Parameter sweeps written as CSV.
    Sweep(sweep::SweepArgs),
    /// Cross-check root finders, margins and the simulator.
    Verify(verify::VerifyArgs),
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    format!(
        "{:+.12} {} {:.12}i",
        z.re,
        if z.im < 0.0 { '-' } else { '+' },
        z.im.abs()
    )
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        // only fails when a global pool already exists, which it cannot here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    match &cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Verify(a) => verify::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
