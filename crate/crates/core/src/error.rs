use thiserror::Error;

/// Errors raised by the operator laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// Malformed or non-finite input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// A numeric parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Not enough usable data for a fit or estimate.
    #[error("degenerate data: {0}")]
    Degenerate(String),
    /// Operands that cannot be combined (symbol basis vs grid kind, shapes).
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    /// A dense decomposition failed to converge.
    #[error("numerical failure in {module}: {detail}")]
    Numeric { module: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn parameter(msg: impl Into<String>) -> LabError {
    LabError::Parameter(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> LabError {
    LabError::Input(msg.into())
}
