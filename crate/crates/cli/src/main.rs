//! `aoi`: command-line front end for the age-of-information engines.
//!
//! Exit codes: 0 success, 1 usage error, 2 MGF argument outside the
//! admissible domain, 3 numerical engine failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use aoi_core::{AoiError, ErrorClass};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(AoiError),
}

impl From<AoiError> for CliError {
    fn from(e: AoiError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Domain => 2,
                ErrorClass::Engine => 3,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Moments(a) => commands::moments(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => commands::validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aoi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
