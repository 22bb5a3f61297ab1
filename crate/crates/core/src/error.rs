use thiserror::Error;

/// Errors raised by state construction, measurement and scenario handling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid projector family: {0}")]
    InvalidProjectorFamily(String),

    #[error("branch {branch} has zero probability ({probability:.3e})")]
    ZeroProbabilityBranch { branch: usize, probability: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("density matrix is not block-diagonal in the measurement basis (off-block {0:.3e})")]
    NotDecohered(f64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
