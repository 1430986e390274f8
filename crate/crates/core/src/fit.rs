//! Small least-squares helpers for scaling measurements.

use crate::error::{CoreError, Result};

/// Least-squares slope of ln(y) against ln(x).
///
/// Every pair must have strictly positive finite coordinates, and the x
/// values must not all coincide.
pub fn log_log_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(CoreError::TooFewPoints {
            needed: 3,
            found: pairs.len(),
        });
    }
    for &(x, y) in pairs {
        if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "pairs",
                detail: format!("log-log fit needs positive finite pairs, got ({x}, {y})"),
            });
        }
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let den = n * sxx - sx * sx;
    if den <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "pairs",
            detail: "abscissas coincide; slope is undefined".into(),
        });
    }
    Ok((n * sxy - sx * sy) / den)
}
