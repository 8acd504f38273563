use thiserror::Error;

use crate::io::SnapshotError;

/// Errors raised by the library. The CLI maps each family onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument `{key}`: {reason}")]
    InvalidArgument { key: &'static str, reason: String },

    #[error("field invariant violated at cell {cell}: {reason}")]
    Invariant { cell: usize, reason: String },

    #[error("grids differ between operands")]
    GridMismatch,

    #[error("operation requires p {expected}, got p = {found}")]
    Dimension { expected: &'static str, found: usize },

    #[error("field is non-decaying; the integral is not defined on all of space")]
    NonDecaying,

    #[error("{singular} of {total} cells are singular for the lift (limit {limit})")]
    TooManySingular {
        singular: usize,
        total: usize,
        limit: usize,
    },

    #[error("implicit midpoint did not converge after {iterations} iterations (update {update:e})")]
    MidpointDiverged { iterations: usize, update: f64 },

    #[error("non-finite state detected at step {step}")]
    NonFinite { step: usize },

    #[error(transparent)]
    Snapshot(#[from] SnapshotError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn arg(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            key,
            reason: reason.into(),
        }
    }

    /// Exit code family: 2 = config, 3 = io, 4 = numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument { .. } | Error::InvalidGrid(_) => 2,
            Error::Io(_) | Error::Snapshot(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
