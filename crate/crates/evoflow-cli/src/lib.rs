//! Implementation of the `evoflow` command-line tool; see the `evoflow`
//! binary for the user entry point. Split as a library so integration
//! tests can drive the argument types and writers directly.

pub mod bs;
pub mod config;
pub mod oracle;
pub mod output;
pub mod simulate;
pub mod svg;
pub mod sweep;

use clap::Parser;
use config::CliError;

#[derive(Parser, Debug)]
#[command(name = "evoflow", version, about = "Evolution-chain simulator: births draw fitnesses, deaths cull the least fit")]
pub enum Cli {
    /// Run chains and write timeseries, histograms, and a JSON summary
    Simulate(simulate::SimulateArgs),
    /// Density estimates across a grid of birth probabilities
    Sweep(sweep::SweepArgs),
    /// Exact reference distributions as CSV
    Oracle(oracle::OracleArgs),
    /// Ring dynamics: redraw the least-fit site and its two neighbors
    Bs(bs::BsArgs),
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli {
        Cli::Simulate(args) => simulate::run(args),
        Cli::Sweep(args) => sweep::run(args),
        Cli::Oracle(args) => oracle::run(args),
        Cli::Bs(args) => bs::run(args),
    }
}
