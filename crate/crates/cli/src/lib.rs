//! Command-line front end for the `teamplan` mission planner.

use std::ffi::OsString;

use clap::Parser;
use teamplan::PlanError;

pub mod args;
pub mod commands;
pub mod files;

pub use args::Cli;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const GENERATION_FAILED: i32 = 4;
    pub const VALIDATION_FAILED: i32 = 5;
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed input file or bad arguments.
    Parse(String),
    /// A plan was checked and failed.
    ValidationFailed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "{m}"),
            CliError::ValidationFailed(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(e) = err.downcast_ref::<CliError>() {
        return match e {
            CliError::Parse(_) => exit::USAGE,
            CliError::ValidationFailed(_) => exit::VALIDATION_FAILED,
        };
    }
    match err.downcast_ref::<PlanError>() {
        Some(PlanError::InfeasibleInstance { .. }) => exit::INFEASIBLE,
        Some(PlanError::GenerationFailed(_)) => exit::GENERATION_FAILED,
        Some(PlanError::InvalidScenario(_) | PlanError::InvalidParams(_)) => exit::USAGE,
        _ => exit::OTHER,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
