//! `bitsmm`: command-line driver for the bit-serial array simulator.
//!
//! Exit status is 0 when every check passed, 1 when a result disagreed with
//! its oracle and 2 for invalid arguments or I/O problems.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// A simulated result disagreed with its oracle.
    Mismatch,
    Usage(String),
}

impl From<bitsmm::Error> for Failure {
    fn from(e: bitsmm::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mac(a) => commands::mac(a),
        Command::Matmul(a) => commands::matmul(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Trace(a) => commands::trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
