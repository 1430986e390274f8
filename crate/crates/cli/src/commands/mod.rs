//! One module per subcommand, plus the helpers they share.

pub mod adjudicate;
pub mod bounds;
pub mod grover;
pub mod sweep;
pub mod vsearch;

use qsearch_core::unitary::haar_random_unitary;
use qsearch_core::UnitaryOp;

use crate::args::PrepKind;
use crate::exitcode::CliError;

/// Resolves the marked index, defaulting to the last basis state.
pub(crate) fn resolve_target(n: u32, requested: Option<usize>) -> Result<usize, CliError> {
    if n == 0 || n > qsearch_core::state::MAX_QUBITS {
        return Err(CliError::Usage(format!(
            "--n must lie in 1..={}, got {n}",
            qsearch_core::state::MAX_QUBITS
        )));
    }
    let dim = 1usize << n;
    let target = requested.unwrap_or(dim - 1);
    if target >= dim {
        return Err(CliError::Usage(format!(
            "--target {target} is out of range for dimension {dim}"
        )));
    }
    Ok(target)
}

/// Builds the preparation operator, enforcing that haar runs are seeded.
pub(crate) fn build_prep(
    kind: PrepKind,
    dim: usize,
    seed: Option<u64>,
) -> Result<UnitaryOp, CliError> {
    match kind {
        PrepKind::WalshHadamard => Ok(UnitaryOp::WalshHadamard),
        PrepKind::Haar => {
            let seed = seed.ok_or_else(|| {
                CliError::Usage("--prep haar needs --seed for reproducibility".into())
            })?;
            Ok(haar_random_unitary(dim, seed)?)
        }
    }
}

/// Validates a stop threshold: any finite positive value is allowed, and
/// values above 1 simply never trigger.
pub(crate) fn check_threshold(threshold: f64) -> Result<(), CliError> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(CliError::Usage(format!(
            "--threshold must be finite and positive, got {threshold}"
        )));
    }
    Ok(())
}
