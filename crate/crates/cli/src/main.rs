#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod args;
mod commands;
mod output;

#[derive(Parser)]
#[command(name = "condtail", version, about = "Conditional tail-index estimation from weighted log-spacings")]
struct Cli {
    /// Worker threads for grid and replication loops
    #[arg(long, env = "CONDTAIL_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail index at every point of a covariate grid
    Estimate(commands::EstimateArgs),
    /// Choose (h, k) by minimizing the worst Hill/Zipf discrepancy
    Select(commands::SelectArgs),
    /// Draw a conditional sample and optionally run a Monte Carlo check
    Simulate(commands::SimulateArgs),
    /// Tabulate bias and variance orderings over the (rho, rho*) plane
    Regions(commands::RegionsArgs),
    /// Tabulate asymptotic normal densities of the four estimators
    Density(commands::DensityArgs),
    /// Convert a dated daily series to (year, day of year) covariates
    EncodeDaily(commands::EncodeDailyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Select(a) => commands::select(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Regions(a) => commands::regions(a),
        Command::Density(a) => commands::density(a),
        Command::EncodeDaily(a) => commands::encode_daily(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
