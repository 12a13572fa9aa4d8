//! Batch front-end of `obatalab`: argument parsing, command dispatch and
//! deterministic artifacts.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod fixtures;
pub mod output;
pub mod plot;
pub mod table;

use std::time::Instant;

pub use args::Cli;
pub use error::{CliError, CliResult};

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Crash = 1,
    Violation = 2,
}

/// Runs one command and writes its artifacts.
pub fn run(cli: &Cli) -> CliResult<Status> {
    let start = Instant::now();
    let outcome = commands::execute(cli)?;
    output::write_artifacts(cli, &outcome, start.elapsed())?;
    for v in &outcome.violations {
        eprintln!("violation: {v}");
    }
    Ok(if outcome.violations.is_empty() { Status::Ok } else { Status::Violation })
}
