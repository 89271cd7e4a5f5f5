//! `evoflow` — birth-death evolution chain simulator and verification
//! front end.
//!
//! Every output is deterministic for a fixed seed: rerunning a command
//! reproduces each file byte for byte. Exit codes: 0 success, 2
//! configuration error, 3 runtime or resource error.

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = evoflow_cli::Cli::parse();
    match evoflow_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
