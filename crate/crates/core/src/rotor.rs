//! The controlled-rotation search operator
//! V = exp(-i (alpha/2) (|psi_f'><psi_i| + |psi_i><psi_f'|)),
//! its instrumented runs, and measured step-count scaling.

use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fit::log_log_slope;
use crate::frame::{make_frame, SubspaceFrame, DEGENERACY_TOL};
use crate::geometry::{check_rotor_exponent, OverlapMagnitude};
use crate::grover::{iterate_operator, IterationTrace, SearchSpec, NO_COUPLING_TOL};
use crate::state::StateVector;
use crate::unitary::{two_plane_rotation, UnitaryOp};

/// The rotation operator together with the plane it acts in and its angle.
#[derive(Debug, Clone)]
pub struct VOperator {
    frame: SubspaceFrame,
    alpha: f64,
    rotor_exponent: f64,
    op: UnitaryOp,
}

impl VOperator {
    /// Builds V from an explicit frame and a nominal coupling magnitude.
    ///
    /// The rotation angle is alpha = 2 arcsin(u^p) for the *nominal* u, while
    /// the generator |b><e0| + |e0><b| is reconstructed from the frame's
    /// actual overlap. Engineered setups may pair an orthogonal frame with a
    /// nonzero nominal u; for those the generator reduces to a pure swap and
    /// every step advances the Bargmann angle by exactly alpha.
    pub fn from_frame(
        frame: SubspaceFrame,
        nominal: OverlapMagnitude,
        rotor_exponent: f64,
    ) -> Result<Self> {
        check_rotor_exponent(rotor_exponent)?;
        let u = nominal.value();
        if u <= NO_COUPLING_TOL {
            return Err(CoreError::NoCoupling {
                limit: NO_COUPLING_TOL,
            });
        }
        if u >= 1.0 - DEGENERACY_TOL {
            return Err(CoreError::DegenerateFrame { overlap: u });
        }
        let alpha = 2.0 * u.powf(rotor_exponent).asin();
        let c = frame.overlap();
        let w = (1.0 - c.norm_sqr()).max(0.0).sqrt();
        // In frame coordinates b = (c, w), so the generator is
        // [[c + conj(c), w], [w, 0]].
        let generator = [
            [Complex64::new(2.0 * c.re, 0.0), Complex64::new(w, 0.0)],
            [Complex64::new(w, 0.0), Complex64::new(0.0, 0.0)],
        ];
        let op = two_plane_rotation(&frame, generator, alpha)?;
        Ok(Self {
            frame,
            alpha,
            rotor_exponent,
            op,
        })
    }

    /// The rotation angle alpha = 2 arcsin(u^p).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rotor_exponent(&self) -> f64 {
        self.rotor_exponent
    }

    pub fn frame(&self) -> &SubspaceFrame {
        &self.frame
    }

    pub fn op(&self) -> &UnitaryOp {
        &self.op
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.op.apply(v)
    }
}

/// Builds V for a search instance from its actual coupling magnitude.
pub fn build_v(spec: &SearchSpec) -> Result<VOperator> {
    let reference = spec.pulled_back_target()?;
    let frame = make_frame(spec.initial(), &reference)?;
    let nominal = OverlapMagnitude::new(frame.overlap().norm())?;
    VOperator::from_frame(frame, nominal, spec.rotor_exponent())
}

/// Runs the rotation search, stopping at `stop_threshold` or after
/// `max_steps` applications.
pub fn run_vsearch(
    spec: &SearchSpec,
    max_steps: usize,
    stop_threshold: f64,
) -> Result<IterationTrace> {
    let v = build_v(spec)?;
    let reference = spec.pulled_back_target()?;
    iterate_operator(v.op(), spec.initial(), &reference, max_steps, stop_threshold)
}

/// One measured point of a scaling fit.
#[derive(Debug, Clone, Copy)]
pub struct ScalingPoint {
    pub n_qubits: u32,
    pub dim: usize,
    pub first_passage: usize,
}

/// Result of fitting measured first-passage counts against problem size.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    /// Least-squares slope of ln(first_passage) against ln(dim).
    pub slope: f64,
    pub points: Vec<ScalingPoint>,
}

/// Runs exhaustive rotation searches across register widths and fits the
/// measured first-passage step counts against the search-space size.
pub fn scaling_fit(
    n_range: RangeInclusive<u32>,
    rotor_exponent: f64,
    stop_threshold: f64,
) -> Result<ScalingFit> {
    check_rotor_exponent(rotor_exponent)?;
    if !(stop_threshold > 0.0 && stop_threshold <= 1.0) {
        return Err(CoreError::InvalidParameter {
            name: "stop_threshold",
            detail: format!("scaling fits need a reachable threshold in (0, 1], got {stop_threshold}"),
        });
    }
    let widths: Vec<u32> = n_range.collect();
    if widths.len() < 3 {
        return Err(CoreError::InvalidParameter {
            name: "n_range",
            detail: format!("need at least 3 register widths, got {}", widths.len()),
        });
    }

    let mut points = Vec::with_capacity(widths.len());
    for &n in &widths {
        let spec =
            SearchSpec::exhaustive(n, (1usize << n) - 1)?.with_rotor_exponent(rotor_exponent)?;
        let v = build_v(&spec)?;
        // The first fidelity peak sits at alpha * steps ~ pi; a little slack
        // covers the discreteness around it.
        let budget = (std::f64::consts::PI / v.alpha()).ceil() as usize + 4;
        let trace = run_vsearch(&spec, budget, stop_threshold)?;
        let Some(first_passage) = trace.first_passage(stop_threshold) else {
            return Err(CoreError::InvalidParameter {
                name: "stop_threshold",
                detail: format!(
                    "threshold {stop_threshold} was not reached within {budget} rotations at n = {n}"
                ),
            });
        };
        if first_passage == 0 {
            return Err(CoreError::InvalidParameter {
                name: "stop_threshold",
                detail: format!("instance n = {n} is above the threshold before any rotation"),
            });
        }
        points.push(ScalingPoint {
            n_qubits: n,
            dim: 1usize << n,
            first_passage,
        });
    }

    let pairs: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.dim as f64, p.first_passage as f64))
        .collect();
    Ok(ScalingFit {
        slope: log_log_slope(&pairs)?,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bargmann_angle;
    use crate::state::inner_product;

    const EPSILON: f64 = 1e-12;

    #[test]
    fn rotation_angle_is_frozen_for_sixteen_states() {
        let spec = SearchSpec::exhaustive(4, 5).unwrap();
        let v = build_v(&spec).unwrap();
        assert!((v.alpha() - 0.505_360_510_284_157_3).abs() < EPSILON);
    }

    #[test]
    fn search_follows_the_in_plane_law() {
        // success(k) = u^2 + (1 - u^2) sin^2(k alpha / 2) for real coupling.
        let spec = SearchSpec::exhaustive(5, 9).unwrap();
        let v = build_v(&spec).unwrap();
        let trace = run_vsearch(&spec, 10, 2.0).unwrap();
        let u_sq = 1.0 / 32.0;
        for r in trace.records() {
            let s = (r.step as f64 * v.alpha() / 2.0).sin().powi(2);
            let expect = u_sq + (1.0 - u_sq) * s;
            assert!((r.success_prob - expect).abs() < 1e-10, "step {}", r.step);
        }
    }

    #[test]
    fn first_passage_matches_frozen_table() {
        // thr = 1/2, exhaustive, p = 1: n = 4..6 need 3, 5, 7 rotations.
        for (n, expect) in [(4u32, 3usize), (5, 5), (6, 7)] {
            let spec = SearchSpec::exhaustive(n, 1).unwrap();
            let trace = run_vsearch(&spec, 40, 0.5).unwrap();
            assert_eq!(trace.first_passage(0.5), Some(expect), "n = {n}");
        }
    }

    #[test]
    fn orthogonal_frame_advances_by_exactly_alpha() {
        let frame = make_frame(
            &StateVector::basis(2, 0).unwrap(),
            &StateVector::basis(2, 1).unwrap(),
        )
        .unwrap();
        let v = VOperator::from_frame(frame, OverlapMagnitude::new(0.5).unwrap(), 1.0).unwrap();
        let alpha = v.alpha();
        assert!((alpha - std::f64::consts::FRAC_PI_3).abs() < EPSILON);

        let initial = StateVector::basis(2, 0).unwrap();
        let mut state = initial.clone();
        for k in 1..=3 {
            state = v.apply(&state).unwrap();
            let angle = bargmann_angle(&initial, &state).unwrap();
            assert!(
                (angle - k as f64 * alpha).abs() < 1e-10,
                "step {k}: {angle} vs {}",
                k as f64 * alpha
            );
        }
    }

    #[test]
    fn non_orthogonal_advance_deviates_within_the_coupling_bound() {
        for n in [2u32, 4, 6] {
            let spec = SearchSpec::exhaustive(n, 0).unwrap();
            let v = build_v(&spec).unwrap();
            let u = 2f64.powf(-(n as f64) / 2.0);
            let moved = v.apply(spec.initial()).unwrap();
            let advance = bargmann_angle(spec.initial(), &moved).unwrap();
            let deviation = (advance - v.alpha()).abs();
            assert!(deviation > 1e-9, "deviation should be measurable at n={n}");
            assert!(
                deviation <= u * v.alpha(),
                "n={n}: {deviation} vs {}",
                u * v.alpha()
            );
        }
    }

    #[test]
    fn rotor_preserves_the_orthogonal_complement() {
        let spec = SearchSpec::exhaustive(3, 6).unwrap();
        let v = build_v(&spec).unwrap();
        // A vector orthogonal to both frame legs must be fixed.
        let e0 = v.frame().e0();
        let e1 = v.frame().e1();
        let probe = StateVector::random(3, 77).unwrap();
        let c0 = inner_product(e0, &probe).unwrap();
        let c1 = inner_product(e1, &probe).unwrap();
        let raw: Vec<Complex64> = probe
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, a)| a - c0 * e0.amplitudes()[k] - c1 * e1.amplitudes()[k])
            .collect();
        let off_plane = StateVector::normalized(raw).unwrap();
        let moved = v.apply(&off_plane).unwrap();
        let diff = off_plane
            .amplitudes()
            .iter()
            .zip(moved.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-11);
    }

    #[test]
    fn degenerate_and_uncoupled_frames_are_rejected() {
        let frame = make_frame(
            &StateVector::basis(1, 0).unwrap(),
            &StateVector::basis(1, 1).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            VOperator::from_frame(frame.clone(), OverlapMagnitude::new(0.0).unwrap(), 1.0),
            Err(CoreError::NoCoupling { .. })
        ));
        assert!(matches!(
            VOperator::from_frame(frame, OverlapMagnitude::new(1.0).unwrap(), 1.0),
            Err(CoreError::DegenerateFrame { .. })
        ));
    }

    #[test]
    fn scaling_fit_reports_square_root_like_slope() {
        let fit = scaling_fit(4..=8, 1.0, 0.5).unwrap();
        assert_eq!(fit.points.len(), 5);
        let measured: Vec<usize> = fit.points.iter().map(|p| p.first_passage).collect();
        assert_eq!(measured, vec![3, 5, 7, 9, 13]);
        assert!(fit.slope > 0.40 && fit.slope < 0.60, "slope {}", fit.slope);
    }

    #[test]
    fn scaling_fit_validates_inputs() {
        assert!(scaling_fit(4..=5, 1.0, 0.5).is_err());
        assert!(scaling_fit(4..=8, 1.0, 1.5).is_err());
        assert!(scaling_fit(4..=8, 0.0, 0.5).is_err());
    }
}
