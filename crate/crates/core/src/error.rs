use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The reference energy is zero, so a relative residual is undefined.
    #[error("degenerate reference energy: {0}")]
    DegenerateReference(String),

    #[error("strategy not applicable: {0}")]
    StrategyInapplicable(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Json(_)
            | Error::DegenerateReference(_)
            | Error::StrategyInapplicable(_)
            | Error::InsufficientData(_) => 2,
            Error::CapacityExceeded(_) => 3,
            Error::Io(_) | Error::Csv(_) => 4,
            Error::Integrity(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
