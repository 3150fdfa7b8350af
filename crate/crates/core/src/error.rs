use thiserror::Error;

/// Errors raised by the solvers, the simulator and parameter validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuinError {
    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("dual inversion failed: {0}")]
    Inversion(String),

    #[error("no case condition holds: {0}")]
    CaseSelection(String),

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("strategy violates the regime constraint: {0}")]
    Strategy(String),
}

pub type Result<T> = std::result::Result<T, RuinError>;
