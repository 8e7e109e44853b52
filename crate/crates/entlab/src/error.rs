use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum EntLabError {
    /// Invalid argument (dimension mismatch, out-of-range parameter, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A register or operator would exceed the configured dimension cap.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An iterative routine failed to converge.
    #[error("convergence error: {reason} (residual {residual:.3e})")]
    Convergence { reason: String, residual: f64 },

    /// A conditional operation hit a zero-probability branch.
    #[error("degenerate error: {0}")]
    Degenerate(String),

    /// The requested operation is not supported for these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A root bracket does not straddle a sign change.
    #[error("bracket error: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, EntLabError>;

impl EntLabError {
    pub fn argument(msg: impl Into<String>) -> Self {
        EntLabError::Argument(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        EntLabError::Capacity(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        EntLabError::Unsupported(msg.into())
    }
}
