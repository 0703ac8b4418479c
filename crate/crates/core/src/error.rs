use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Paired inputs disagree in length.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Root bracketing or bisection failed. Indicates a bug, not bad data.
    #[error("root finding failed to converge: {0}")]
    NoConvergence(&'static str),

    /// A point estimator could not produce an estimate from the data.
    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    /// Input too degenerate for the requested operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Too many bootstrap replicates failed for the result to be trusted.
    #[error("unreliable bootstrap: {failed} of {total} replicates failed")]
    UnreliableBootstrap { failed: usize, total: usize },

    /// Invalid experiment or band configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
