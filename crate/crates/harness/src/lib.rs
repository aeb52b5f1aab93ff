//! Command-line orchestration for the benchmark: dataset generation,
//! simulation with and without attention balancing, scoring, sweeps and
//! reports. The `mihbench` binary is a thin wrapper around [`run`].

pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

pub fn execute(cli: &Cli) -> Result<RunManifest> {
    let seed = cli.seed;
    let master = seed.unwrap_or(commands::DEFAULT_SEED);
    match &cli.command {
        Command::Synth(a) => commands::synth(a, master),
        Command::GenData(a) => commands::gen_data(a, master),
        Command::RunSim(a) => commands::run_sim(a, seed),
        Command::Eval(a) => commands::eval(a),
        Command::Sweep(a) => commands::sweep(a, seed),
        Command::Report(a) => commands::report(a),
    }
}

/// Parses `args` and runs the command. Returns the process exit code; on
/// failure a JSON error record has been written to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return 0;
            }
            let err = HarnessError::usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_record());
            return err.kind.exit_code();
        }
    };
    match execute(&cli) {
        Ok(_) => 0,
        Err(err) => {
            eprintln!("{}", err.to_record());
            err.kind.exit_code()
        }
    }
}
