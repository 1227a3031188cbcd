use thiserror::Error;

/// Errors raised by model construction, the schemes, and the checkers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The antenna configuration lies outside the regime an operation serves.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A measure-zero channel draw (e.g. a singular square subsystem).
    #[error("degenerate draw: {0}")]
    DegenerateDraw(String),

    #[error("state space too large: {states} states exceeds limit {limit}")]
    TooLarge { states: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
