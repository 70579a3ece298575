//! Command-line front end: `analyze`, `construct` and `verify` over JSON
//! documents.

pub mod commands;
pub mod document;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

use crate::commands::{AnalyzeArgs, ConstructArgs, VerifyArgs};

/// Process exit codes.
pub mod exit {
    /// Construction succeeded, all checks passed, and the hypotheses held.
    pub const SUCCESS: i32 = 0;
    /// Construction succeeded but the hypotheses did not promise it.
    pub const UNGUARANTEED: i32 = 1;
    /// The target expectation is unreachable or no tribe fits.
    pub const INFEASIBLE: i32 = 2;
    pub const INPUT_ERROR: i32 = 3;
    pub const VERIFICATION_FAILURE: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "tribes", version, about = "Tribes functions under per-variable influence budgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the Talagrand sum, alpha and the guaranteed expectation range.
    Analyze(AnalyzeArgs),
    /// Build the tribes function and write a full report.
    Construct(ConstructArgs),
    /// Re-verify a report written by `construct`.
    Verify(VerifyArgs),
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::SUCCESS,
                _ => exit::INPUT_ERROR,
            };
        }
    };
    let result = match &cli.command {
        Command::Analyze(args) => commands::analyze(args, stdout),
        Command::Construct(args) => commands::construct_cmd(args, stdout, stderr),
        Command::Verify(args) => commands::verify_cmd(args, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}
