//! Orthonormal coordinates on the plane spanned by two non-collinear rays.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::state::{inner_product, StateVector};

/// Overlap magnitude at which two rays are treated as one: past this there is
/// no two-dimensional plane left to work in.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Orthonormal basis (e0, e1) of span{a, b} with e0 = a, together with the
/// original overlap c = <a|b> so callers can reconstruct
/// b = c*e0 + w*e1 with w = sqrt(1 - |c|^2).
#[derive(Debug, Clone)]
pub struct SubspaceFrame {
    e0: StateVector,
    e1: StateVector,
    overlap: Complex64,
}

impl SubspaceFrame {
    pub fn e0(&self) -> &StateVector {
        &self.e0
    }

    pub fn e1(&self) -> &StateVector {
        &self.e1
    }

    /// `<e0|b>` for the second vector the frame was built from.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }

    pub fn dim(&self) -> usize {
        self.e0.dim()
    }
}

/// Gram-Schmidt on the ordered pair (a, b): e0 = a, e1 is the normalized
/// component of b orthogonal to a.
pub fn make_frame(a: &StateVector, b: &StateVector) -> Result<SubspaceFrame> {
    let c = inner_product(a, b)?;
    if c.norm() >= 1.0 - DEGENERACY_TOL {
        return Err(CoreError::DegenerateFrame { overlap: c.norm() });
    }
    let residual: Vec<Complex64> = b
        .amplitudes()
        .iter()
        .zip(a.amplitudes())
        .map(|(bk, ak)| bk - c * ak)
        .collect();
    let e1 = StateVector::normalized(residual)?;
    Ok(SubspaceFrame {
        e0: a.clone(),
        e1,
        overlap: c,
    })
}
