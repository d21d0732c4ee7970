//! Error taxonomy shared by the whole crate.
//!
//! The three public categories map onto the CLI exit codes: invalid input
//! (2), resource bound exceeded (3), and mathematical verification failure
//! (1). The last one is reserved for situations where a runtime check of an
//! invariant fails; it indicates either a bug or a falsified hypothesis and
//! is never downgraded to a warning.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad document, shape mismatch,
    /// precondition violation by the caller).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured resource bound would be exceeded. The message names the
    /// bound and the predicted cost, computed before any large allocation.
    #[error("resource bound exceeded: {0}")]
    Resource(String),

    /// A mathematical invariant failed an exact runtime check.
    #[error("verification failure [{invariant}]: {detail}")]
    Verification { invariant: String, detail: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn verification(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Verification {
            invariant: invariant.into(),
            detail: detail.into(),
        }
    }

    /// CLI exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Verification { .. } => 1,
            Error::InvalidInput(_) => 2,
            Error::Resource(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
