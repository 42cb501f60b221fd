use thiserror::Error;

/// Errors raised by the synchronization pipeline.
///
/// Variants are grouped by kind rather than by module so callers can match on
/// the class of failure; the message carries the module-specific detail.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SyncError {
    /// The caller violated a precondition (mismatched groups, bad parameter).
    #[error("usage error: {0}")]
    Usage(String),

    /// The request exceeds a configured capability (e.g. irrep order cap).
    #[error("capability error: {0}")]
    Capability(String),

    /// A loss function produced a non-finite value on its integration range.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A numerical routine failed to converge or met a singular input.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The measurement graph has the wrong shape (e.g. disconnected).
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, SyncError>;

macro_rules! usage {
    ($($arg:tt)*) => { $crate::error::SyncError::Usage(format!($($arg)*)) };
}
pub(crate) use usage;
