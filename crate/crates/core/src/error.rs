//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("amplitude vector of length {len} is not a power of two of at least 2")]
    BadDimension { len: usize },

    #[error("state norm deviates from 1 by {deviation:.3e} (limit {limit:.0e})")]
    NotNormalized { deviation: f64, limit: f64 },

    #[error("matrix is not unitary: max |U\u{2020}U - I| entry is {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    #[error("operator is not Hermitian: max |H - H\u{2020}| entry is {deviation:.3e}")]
    NonHermitian { deviation: f64 },

    #[error(
        "initial and target states lie on the same ray (overlap magnitude {overlap}); \
         there is no plane to rotate in"
    )]
    DegenerateFrame { overlap: f64 },

    #[error(
        "initial and target states are uncoupled (overlap magnitude at or below {limit:.0e}); \
         the iteration cannot move between them"
    )]
    NoCoupling { limit: f64 },

    #[error("invalid {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error(
        "integration failed at step {step}: norm drift {drift:.3e} exceeds {limit:.0e}; \
         the time grid is too coarse for this Hamiltonian"
    )]
    IntegrationFailure { step: usize, drift: f64, limit: f64 },

    #[error("trace and report are on different grids: {detail}")]
    GridMismatch { detail: String },

    #[error("too few grid points: need at least {needed}, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("numerical consistency check failed: {detail}")]
    NumericalConsistency { detail: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
