//! Library half of the `dermkt` command-line tool: scenario file I/O, the
//! capacity-sweep engine, and deterministic output formatting. The binary in
//! `main.rs` is a thin argument-parsing layer over this.

use std::fmt;

pub mod output;
pub mod scenario_io;
pub mod sweep;

/// CLI-level errors, split by exit code: input problems exit 1, solver
/// problems exit 2.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Input(String),
    Solver(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Solver(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dermkt_core::SolveError> for CliError {
    fn from(e: dermkt_core::SolveError) -> Self {
        match e {
            dermkt_core::SolveError::InvalidScenario(_) => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<dermkt_core::OnePartError> for CliError {
    fn from(e: dermkt_core::OnePartError) -> Self {
        match e {
            dermkt_core::OnePartError::Config(_)
            | dermkt_core::OnePartError::NonPositiveInput { .. } => CliError::Input(e.to_string()),
            dermkt_core::OnePartError::Solve(inner) => inner.into(),
            _ => CliError::Solver(e.to_string()),
        }
    }
}
