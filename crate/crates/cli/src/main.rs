//! `spartan`: tables, length scales, simulations and oracle validation for
//! Spartan and Bessel-Lommel covariance models.

mod args;
mod commands;
mod output;
mod validate;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use spartan_core::Error;

/// Exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const PERMISSIBILITY: u8 = 2;
    pub const UNSUPPORTED: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const IO: u8 = 74;
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
    /// Validation ran but at least one check failed; the report was already emitted.
    ChecksFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Permissibility(_) => exit::PERMISSIBILITY,
                Error::Dimension { .. } | Error::Cutoff(_) | Error::Precondition(_) => exit::UNSUPPORTED,
                Error::Domain(_) | Error::Size(_) | Error::EmptyInput(_) | Error::Format(_) => exit::USAGE,
                Error::Io(_) => exit::IO,
                Error::Pole(_) | Error::NonConvergence(_) | Error::Divergence(_) => exit::FAILED,
            },
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) => exit::IO,
            CliError::ChecksFailed => exit::FAILED,
        }
    }

    fn message(&self) -> Option<String> {
        match self {
            CliError::Core(e) => Some(e.to_string()),
            CliError::Usage(m) => Some(format!("usage error: {m}")),
            CliError::Io(m) => Some(format!("i/o error: {m}")),
            CliError::ChecksFailed => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let level = if cli.quiet { "warn" } else { level };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Scales(a) => commands::scales(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => validate::run(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            if let Some(msg) = e.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.code())
        }
    }
}
