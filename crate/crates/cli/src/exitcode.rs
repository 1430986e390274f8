//! Process exit codes and the error type that maps onto them.

use qsearch_core::CoreError;

/// Everything ran and every requested check passed.
pub const SUCCESS: i32 = 0;
/// The run finished but the stop threshold was never met.
pub const THRESHOLD_NOT_REACHED: i32 = 2;
/// Bad arguments or a structurally invalid request.
pub const USAGE: i32 = 64;
/// The instance is degenerate: no coupling or no plane to rotate in.
pub const DEGENERATE: i32 = 65;
/// A numerical check failed: drift, inconsistency, or a violated bound.
pub const NUMERICAL: i32 = 66;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("stop threshold {threshold} not reached within {steps} steps")]
    ThresholdNotReached { threshold: f64, steps: usize },
    #[error("bound check failed: {0}")]
    BoundViolations(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => USAGE,
            CliError::ThresholdNotReached { .. } => THRESHOLD_NOT_REACHED,
            CliError::BoundViolations(_) => NUMERICAL,
            CliError::Core(core) => match core {
                CoreError::InvalidParameter { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::BadDimension { .. }
                | CoreError::TooFewPoints { .. } => USAGE,
                CoreError::DegenerateFrame { .. } | CoreError::NoCoupling { .. } => DEGENERATE,
                _ => NUMERICAL,
            },
            CliError::Io(_) | CliError::Serialize(_) => NUMERICAL,
        }
    }
}
