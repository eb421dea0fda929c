use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, VortexError>;

#[derive(Debug, Error)]
pub enum VortexError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The right-hand side violates the solvability condition `∫_J f cos = 0`.
    #[error("rejected input: solvability residual {residual:.3e} exceeds {tolerance:.3e}")]
    RejectedInput { residual: f64, tolerance: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("iteration diverged at step {iteration} (non-finite iterate)")]
    Diverged { iteration: usize },

    #[error("degenerate linear system: {0}")]
    DegenerateSystem(String),

    /// `v(π/2) ≠ v(−π/2)`: the solution on J does not extend to a π-periodic `v`.
    #[error("solution does not extend periodically: jump increment {jump:.3e} exceeds {tolerance:.3e}")]
    NonPeriodicExtension { jump: f64, tolerance: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl VortexError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        VortexError::InvalidArgument(msg.into())
    }
}
