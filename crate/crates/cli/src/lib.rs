//! Command-line orchestration for the ruin solvers: configuration loading,
//! the `solve`, `figure`, `simulate` and `sweep` commands, and their JSON and
//! CSV output.

pub mod config;
pub mod figure;
pub mod output;
pub mod simulate;
pub mod solve;
pub mod sweep;

use ruin_core::RuinError;

pub use config::Config;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl From<RuinError> for CliError {
    fn from(e: RuinError) -> Self {
        match e {
            RuinError::Parameter(_) | RuinError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
