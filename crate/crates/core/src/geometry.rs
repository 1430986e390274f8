//! Projective-space geometry: overlap magnitudes, the two standard metrics on
//! rays, and the closed-form iteration-count estimates they induce.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::state::{inner_product, StateVector};

/// Slack accepted when clamping a floating overlap magnitude into [0, 1].
pub const OVERLAP_SLACK: f64 = 1e-12;

/// An overlap magnitude |<a|b>| guaranteed to lie in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct OverlapMagnitude(f64);

impl OverlapMagnitude {
    /// Validates and clamps a raw value; rejects anything further than
    /// [`OVERLAP_SLACK`] outside the unit interval.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(-OVERLAP_SLACK..=1.0 + OVERLAP_SLACK).contains(&value) {
            return Err(CoreError::InvalidParameter {
                name: "overlap",
                detail: format!("overlap magnitude must lie in [0, 1], got {value}"),
            });
        }
        Ok(Self(value.clamp(0.0, 1.0)))
    }

    pub fn between(a: &StateVector, b: &StateVector) -> Result<Self> {
        Self::new(inner_product(a, b)?.norm())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Chordal (Fubini-Study) distance d(a, b) = 2 sqrt(1 - |<a|b>|^2).
///
/// Evaluated as twice the norm of b's component orthogonal to a: the residual
/// form stays relatively accurate for nearly collinear rays, where computing
/// 1 - |<a|b>|^2 directly cancels catastrophically.
pub fn fs_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let c = inner_product(a, b)?;
    let residual_sq: f64 = b
        .amplitudes()
        .iter()
        .zip(a.amplitudes())
        .map(|(bk, ak)| (bk - c * ak).norm_sqr())
        .sum();
    Ok(2.0 * residual_sq.sqrt().min(1.0))
}

/// Bargmann angle theta(a, b) = 2 arccos |<a|b>| in [0, pi]: the geodesic
/// length between the rays in the round metric where antipodal means
/// orthogonal. It relates to [`fs_distance`] by d = 2 sin(theta/2).
pub fn bargmann_angle(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(2.0 * OverlapMagnitude::between(a, b)?.value().acos())
}

/// Which closed-form step estimate a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepFormula {
    /// Composite-iteration count from the distance metric: sqrt(1-u^2)/(2u).
    GroverDistanceRatio,
    /// Rotation count from the distance metric: sqrt(1-u^2)/u^p.
    RotorDistanceRatio,
    /// Rotation count from the angle metric: arccos(u)/arcsin(u^p).
    RotorAngleRatio,
}

/// A closed-form iteration-count estimate.
#[derive(Debug, Clone, Copy)]
pub struct StepEstimate {
    pub formula: StepFormula,
    /// Estimated number of iterations; `f64::INFINITY` when `divergent`.
    pub steps: f64,
    /// True when the overlap is 0 and the formula has no finite value.
    pub divergent: bool,
}

impl StepEstimate {
    fn finite(formula: StepFormula, steps: f64) -> Self {
        Self {
            formula,
            steps,
            divergent: false,
        }
    }

    fn divergent(formula: StepFormula) -> Self {
        Self {
            formula,
            steps: f64::INFINITY,
            divergent: true,
        }
    }
}

/// Distance-metric estimate of the composite-iteration count: total chordal
/// distance 2 sqrt(1-u^2) over per-step displacement 4u.
pub fn grover_step_estimate(u: OverlapMagnitude) -> StepEstimate {
    let x = u.value();
    if x == 0.0 {
        return StepEstimate::divergent(StepFormula::GroverDistanceRatio);
    }
    StepEstimate::finite(
        StepFormula::GroverDistanceRatio,
        (1.0 - x * x).sqrt() / (2.0 * x),
    )
}

/// Distance-metric estimate of the rotation count: total chordal distance
/// 2 sqrt(1-u^2) over per-step displacement 2 u^p.
pub fn rotor_steps_by_distance(u: OverlapMagnitude, rotor_exponent: f64) -> Result<StepEstimate> {
    check_rotor_exponent(rotor_exponent)?;
    let x = u.value();
    if x == 0.0 {
        return Ok(StepEstimate::divergent(StepFormula::RotorDistanceRatio));
    }
    Ok(StepEstimate::finite(
        StepFormula::RotorDistanceRatio,
        (1.0 - x * x).sqrt() / x.powf(rotor_exponent),
    ))
}

/// Angle-metric estimate of the rotation count: total half-angle arccos(u)
/// over per-step advance arcsin(u^p). This is the estimate that stays honest
/// when u is not small, because geodesic advances add exactly.
pub fn rotor_steps_by_angle(u: OverlapMagnitude, rotor_exponent: f64) -> Result<StepEstimate> {
    check_rotor_exponent(rotor_exponent)?;
    let x = u.value();
    if x == 0.0 {
        return Ok(StepEstimate::divergent(StepFormula::RotorAngleRatio));
    }
    Ok(StepEstimate::finite(
        StepFormula::RotorAngleRatio,
        x.acos() / x.powf(rotor_exponent).asin(),
    ))
}

/// Chordal distance moved by a single composite iteration, as a function of
/// the coupling magnitude u = |<psi_f'|psi_i>|.
#[derive(Debug, Clone, Copy)]
pub struct OneStepDisplacement {
    /// The small-u value 4u.
    pub claimed: f64,
    /// The exact in-plane value 4u sqrt(1-u^2), from <psi|Q psi> = 1 - 2u^2.
    pub exact: f64,
}

pub fn one_step_displacement(u: OverlapMagnitude) -> OneStepDisplacement {
    let x = u.value();
    OneStepDisplacement {
        claimed: 4.0 * x,
        exact: 4.0 * x * (1.0 - x * x).sqrt(),
    }
}

pub(crate) fn check_rotor_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 || p > 1.0 {
        return Err(CoreError::InvalidParameter {
            name: "rotor_exponent",
            detail: format!("exponent must lie in (0, 1], got {p}"),
        });
    }
    Ok(())
}
