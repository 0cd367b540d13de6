//! Error type shared across the crate.

/// Errors reported by estimators, quadrature routines and the CLI.
///
/// The split matters for the CLI exit code: `Invalid` maps to exit code 1
/// (caller handed us something out of domain), everything else to exit
/// code 2 (the computation itself failed).
#[derive(Debug, thiserror::Error)]
pub enum FracError {
    /// Input validation failure: out-of-range order, empty sample,
    /// malformed grid, bad configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Numerical failure: non-PSD kernel after jitter escalation,
    /// divergent norm, embedding failure, non-finite intermediate.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// I/O or parse failure on files the CLI touches.
    #[error("io failure: {0}")]
    Io(String),
}

impl FracError {
    /// Process exit code: 1 for validation errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            FracError::Invalid(_) => 1,
            FracError::Numerical(_) | FracError::Io(_) => 2,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        FracError::Invalid(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        FracError::Numerical(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        FracError::Io(msg.into())
    }
}

impl From<std::io::Error> for FracError {
    fn from(e: std::io::Error) -> Self {
        FracError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
