use thiserror::Error;

/// Errors produced by the estimators, filters and forecasting pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The optimizer gave up. `best` carries the best iterate seen as
    /// `(argument, objective value)` when one exists.
    #[error("estimation failed: {reason}")]
    EstimationFailed {
        reason: String,
        best: Option<(f64, f64)>,
    },

    #[error("method {method} failed: {source}")]
    Method {
        method: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn failed(reason: impl Into<String>, best: Option<(f64, f64)>) -> Self {
        Error::EstimationFailed {
            reason: reason.into(),
            best,
        }
    }

    pub(crate) fn require_len(got: usize, needed: usize) -> Result<()> {
        if got < needed {
            Err(Error::InsufficientData { needed, got })
        } else {
            Ok(())
        }
    }

    /// Attach a method identity to this error.
    pub fn in_method(self, method: impl Into<String>) -> Self {
        Error::Method {
            method: method.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
