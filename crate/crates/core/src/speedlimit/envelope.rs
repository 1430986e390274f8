//! Bound checks around a recorded evolution: the pointwise transition-rate
//! inequality, the integrated probability envelopes, and the derived
//! step-count bounds.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};
use crate::geometry::check_rotor_exponent;

use super::evolve::EvolutionTrace;
use super::hamiltonian::{Hamiltonian, Preset};

/// Slack added to the rate bound before a point counts as a violation;
/// absorbs integrator noise on the recorded states.
const RATE_TOL: f64 = 1e-7;

/// Default slack for the probability sandwich.
pub const DEFAULT_SANDWICH_TOL: f64 = 1e-9;

/// Largest gap to the upper envelope (up to the probability peak) that
/// still counts as saturation.
const SATURATION_TOL: f64 = 1e-8;

/// How the two envelopes are oriented.
///
/// P(t) = cos^2(theta(t)/2) with theta the angle between the state and the
/// target ray, and the rate inequality caps |theta'| by twice the energy
/// spread. Accumulated action therefore narrows the reachable angle band
/// around theta0 from both sides: the *upper* curve subtracts the action
/// (cos^2 falls on [0, pi/2]) and the *lower* curve adds it. A transcription
/// with the signs swapped produces curves the measured probability crosses
/// almost immediately.
pub const ORIENTATION_NOTE: &str =
    "upper envelope subtracts the accumulated action from the initial angle; lower adds it";

/// One point where the measured rate exceeded its bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateViolation {
    pub index: usize,
    pub time: f64,
    pub rate: f64,
    pub bound: f64,
    pub excess: f64,
}

/// Pointwise check of |dP/dt| <= 2 dh(t) sqrt(P (1 - P)) along a trace.
///
/// The rate is evaluated two ways: a centered finite difference of the
/// recorded probabilities, and the exact form 2 Im(<f|H psi><psi|f>) from
/// the recorded states. The exact form is what the violation test uses; the
/// difference between the two is recorded as a cross-check of the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCheck {
    /// Interior grid times (both endpoints dropped).
    pub times: Vec<f64>,
    pub rate_fd: Vec<f64>,
    pub rate_commutator: Vec<f64>,
    pub bound: Vec<f64>,
    pub violations: Vec<RateViolation>,
    pub max_excess: f64,
    pub max_fd_mismatch: f64,
}

/// Runs the pointwise rate check on a trace that kept its states.
// The index loop reads four parallel arrays plus both grid neighbours, which
// an iterator chain would only obscure.
#[allow(clippy::needless_range_loop)]
pub fn transition_rate_check(trace: &EvolutionTrace, h: &Hamiltonian) -> Result<RateCheck> {
    let n = trace.times.len();
    if n < 3 {
        return Err(CoreError::TooFewPoints {
            needed: 3,
            found: n,
        });
    }
    let Some(states) = trace.states.as_ref() else {
        return Err(CoreError::InvalidParameter {
            name: "trace",
            detail: "rate check needs the stored states; rerun with store_states".into(),
        });
    };
    let dt = trace.times[1] - trace.times[0];
    let target = &trace.target;

    let mut times = Vec::with_capacity(n - 2);
    let mut rate_fd = Vec::with_capacity(n - 2);
    let mut rate_commutator = Vec::with_capacity(n - 2);
    let mut bound = Vec::with_capacity(n - 2);
    let mut violations = Vec::new();
    let mut max_excess = 0.0f64;
    let mut max_fd_mismatch = 0.0f64;

    for k in 1..n - 1 {
        let t = trace.times[k];
        let psi = &states[k];
        let image = h.apply(t, psi.amplitudes())?;
        // <f|H psi> and <psi|f>
        let a: Complex64 = target
            .amplitudes()
            .iter()
            .zip(&image)
            .map(|(f, hv)| f.conj() * hv)
            .sum();
        let b: Complex64 = psi
            .amplitudes()
            .iter()
            .zip(target.amplitudes())
            .map(|(x, f)| x.conj() * f)
            .sum();
        let exact = 2.0 * (a * b).im;
        let fd = (trace.p[k + 1] - trace.p[k - 1]) / (2.0 * dt);
        let cap = 2.0 * trace.delta_h[k] * (trace.p[k] * (1.0 - trace.p[k])).max(0.0).sqrt();

        times.push(t);
        rate_fd.push(fd);
        rate_commutator.push(exact);
        bound.push(cap);
        max_fd_mismatch = max_fd_mismatch.max((fd - exact).abs());
        let excess = exact.abs() - cap;
        max_excess = max_excess.max(excess);
        if excess > RATE_TOL {
            violations.push(RateViolation {
                index: k,
                time: t,
                rate: exact,
                bound: cap,
                excess,
            });
        }
    }

    Ok(RateCheck {
        times,
        rate_fd,
        rate_commutator,
        bound,
        violations,
        max_excess,
        max_fd_mismatch,
    })
}

/// The integrated envelopes around the transition probability.
#[derive(Debug, Clone)]
pub struct Envelopes {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

/// Probability envelopes from the initial angle and the accumulated action.
///
/// With theta0 = 2 arccos(sqrt(P0)) and A(t) the integral of the target
/// energy spread, every solution satisfies
/// cos^2(min(pi/2, theta0/2 + A)) <= P(t) <= cos^2(max(0, theta0/2 - A)).
pub fn envelopes(theta0: f64, action: &[f64]) -> Result<Envelopes> {
    if !(theta0.is_finite() && (-1e-12..=std::f64::consts::PI + 1e-9).contains(&theta0)) {
        return Err(CoreError::InvalidParameter {
            name: "theta0",
            detail: format!("initial angle must lie in [0, pi], got {theta0}"),
        });
    }
    let half = (theta0.max(0.0) / 2.0).min(FRAC_PI_2);
    let mut upper = Vec::with_capacity(action.len());
    let mut lower = Vec::with_capacity(action.len());
    for &a in action {
        if !(a.is_finite() && a >= -1e-12) {
            return Err(CoreError::InvalidParameter {
                name: "action",
                detail: format!("accumulated action must be nonnegative, got {a}"),
            });
        }
        let a = a.max(0.0);
        upper.push((half - a).max(0.0).cos().powi(2));
        lower.push((half + a).min(FRAC_PI_2).cos().powi(2));
    }
    Ok(Envelopes { upper, lower })
}

/// A bound that may blow up when the angle band reaches pi/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    Divergent,
}

impl BoundValue {
    pub fn is_divergent(self) -> bool {
        matches!(self, BoundValue::Divergent)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            BoundValue::Finite(v) => Some(v),
            BoundValue::Divergent => None,
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundValue::Finite(v) => s.serialize_f64(*v),
            BoundValue::Divergent => s.serialize_str("divergent"),
        }
    }
}

impl<'de> Deserialize<'de> for BoundValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BoundVisitor;
        impl<'de> Visitor<'de> for BoundVisitor {
            type Value = BoundValue;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a finite number or the string \"divergent\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<BoundValue, E> {
                if v.is_finite() {
                    Ok(BoundValue::Finite(v))
                } else {
                    Err(E::custom("numeric bound must be finite"))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BoundValue, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BoundValue, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BoundValue, E> {
                if v == "divergent" {
                    Ok(BoundValue::Divergent)
                } else {
                    Err(E::custom(format!("unknown bound marker {v:?}")))
                }
            }
        }
        d.deserialize_any(BoundVisitor)
    }
}

/// Secant-power bounds on the inverse coupling implied by one run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepBounds {
    pub rotor_exponent: f64,
    pub lower: BoundValue,
    pub upper: BoundValue,
}

/// sec^p bound pair from the initial angle and the total accumulated action.
///
/// The band theta0/2 -+ A caps the angle actually reached; pushing it
/// through sec(.)^p bounds 1/u^p, the quantity that sets the step count of
/// the rotation search. Either side diverges when its angle reaches pi/2.
pub fn step_bounds(theta0: f64, action: f64, rotor_exponent: f64) -> Result<StepBounds> {
    check_rotor_exponent(rotor_exponent)?;
    if !(theta0.is_finite() && (-1e-12..=std::f64::consts::PI + 1e-9).contains(&theta0)) {
        return Err(CoreError::InvalidParameter {
            name: "theta0",
            detail: format!("initial angle must lie in [0, pi], got {theta0}"),
        });
    }
    if !(action.is_finite() && action >= 0.0) {
        return Err(CoreError::InvalidParameter {
            name: "action",
            detail: format!("accumulated action must be nonnegative and finite, got {action}"),
        });
    }
    let half = (theta0.max(0.0) / 2.0).min(FRAC_PI_2);
    let sec_power = |angle: f64| -> BoundValue {
        if angle < FRAC_PI_2 {
            BoundValue::Finite(angle.cos().recip().powf(rotor_exponent))
        } else {
            BoundValue::Divergent
        }
    };
    Ok(StepBounds {
        rotor_exponent,
        lower: sec_power((half - action).max(0.0)),
        upper: sec_power(half + action),
    })
}

/// One grid point where the probability escaped its envelope band.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichViolation {
    pub index: usize,
    pub time: f64,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    /// How far outside the band, before tolerance.
    pub excess: f64,
}

fn collect_sandwich_violations(
    times: &[f64],
    p: &[f64],
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> Vec<SandwichViolation> {
    let mut out = Vec::new();
    for k in 0..p.len() {
        let excess = (p[k] - upper[k]).max(lower[k] - p[k]);
        if excess > tol {
            out.push(SandwichViolation {
                index: k,
                time: times[k],
                p: p[k],
                lower: lower[k],
                upper: upper[k],
                excess,
            });
        }
    }
    out
}

/// Everything one bound-verification run produces, in serializable form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeReport {
    pub preset: Preset,
    /// Initial angle to the target ray, 2 arccos(sqrt(P0)).
    pub theta0: f64,
    pub rotor_exponent: f64,
    /// Sandwich slack the verdict was computed with.
    pub tolerance: f64,
    pub times: Vec<f64>,
    pub p: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub delta_h: Vec<f64>,
    pub action: Vec<f64>,
    pub rate: RateCheck,
    pub step_bounds: StepBounds,
    pub sandwich_violations: Vec<SandwichViolation>,
    /// Whether the run hugs the upper envelope all the way to its peak.
    pub saturated: bool,
    pub max_gap_to_upper: f64,
    pub max_norm_drift: f64,
    pub renormalizations: usize,
    pub orientation: String,
}

/// Assembles the full report for one recorded evolution.
pub fn build_envelope_report(
    trace: &EvolutionTrace,
    h: &Hamiltonian,
    rotor_exponent: f64,
    tolerance: f64,
) -> Result<EnvelopeReport> {
    check_rotor_exponent(rotor_exponent)?;
    if !(tolerance.is_finite() && tolerance > 0.0 && tolerance <= 1e-3) {
        return Err(CoreError::InvalidParameter {
            name: "tolerance",
            detail: format!("sandwich tolerance must lie in (0, 1e-3], got {tolerance}"),
        });
    }
    let p0 = trace.p[0].clamp(0.0, 1.0);
    let theta0 = 2.0 * p0.sqrt().acos();
    let env = envelopes(theta0, &trace.action)?;
    let rate = transition_rate_check(trace, h)?;
    let final_action = *trace.action.last().expect("trace grids are nonempty");
    let bounds = step_bounds(theta0, final_action, rotor_exponent)?;
    let sandwich_violations =
        collect_sandwich_violations(&trace.times, &trace.p, &env.lower, &env.upper, tolerance);

    // Saturation is judged against the rising stretch only: up to the peak,
    // a saturating run should track the upper envelope within rounding.
    let peak = trace
        .p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let max_gap_to_upper = (0..=peak)
        .map(|k| (env.upper[k] - trace.p[k]).abs())
        .fold(0.0, f64::max);
    let saturated = max_gap_to_upper <= SATURATION_TOL;

    Ok(EnvelopeReport {
        preset: h.preset(),
        theta0,
        rotor_exponent,
        tolerance,
        times: trace.times.clone(),
        p: trace.p.clone(),
        upper: env.upper,
        lower: env.lower,
        delta_h: trace.delta_h.clone(),
        action: trace.action.clone(),
        rate,
        step_bounds: bounds,
        sandwich_violations,
        saturated,
        max_gap_to_upper,
        max_norm_drift: trace.max_norm_drift,
        renormalizations: trace.renormalizations,
        orientation: ORIENTATION_NOTE.to_string(),
    })
}

/// Re-checks a report's envelopes against an independently recorded trace.
///
/// The grids must agree exactly; any probability outside the report's band
/// by more than `tol` is returned.
pub fn verify_sandwich(
    trace: &EvolutionTrace,
    report: &EnvelopeReport,
    tol: f64,
) -> Result<Vec<SandwichViolation>> {
    if trace.times.len() != report.times.len()
        || report.p.len() != report.times.len()
        || report.upper.len() != report.times.len()
        || report.lower.len() != report.times.len()
    {
        return Err(CoreError::GridMismatch {
            detail: format!(
                "trace has {} nodes, report arrays have {}/{}/{}/{}",
                trace.times.len(),
                report.times.len(),
                report.p.len(),
                report.upper.len(),
                report.lower.len()
            ),
        });
    }
    for (k, (a, b)) in trace.times.iter().zip(&report.times).enumerate() {
        if (a - b).abs() > 1e-12 {
            return Err(CoreError::GridMismatch {
                detail: format!("grids differ at node {k}: {a} vs {b}"),
            });
        }
    }
    Ok(collect_sandwich_violations(
        &trace.times,
        &trace.p,
        &report.lower,
        &report.upper,
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speedlimit::evolve::evolve;
    use crate::state::StateVector;

    const EPSILON: f64 = 1e-9;

    fn rabi_trace(omega: f64, t_end: f64, steps: usize) -> (EvolutionTrace, Hamiltonian) {
        let h = Hamiltonian::constant_rabi(omega).unwrap();
        let initial = StateVector::basis(1, 0).unwrap();
        let target = StateVector::basis(1, 1).unwrap();
        let trace = evolve(&h, &initial, &target, t_end, steps).unwrap();
        (trace, h)
    }

    #[test]
    fn resonant_run_saturates_every_bound() {
        let (trace, h) = rabi_trace(std::f64::consts::PI, 1.0, 1024);
        let report = build_envelope_report(&trace, &h, 1.0, DEFAULT_SANDWICH_TOL).unwrap();
        assert!(report.sandwich_violations.is_empty());
        assert!(report.rate.violations.is_empty());
        assert!(report.saturated, "gap {}", report.max_gap_to_upper);
        assert!((report.theta0 - std::f64::consts::PI).abs() < 1e-12);
        // On resonance the rate inequality is an equality, so the recorded
        // excess must sit at zero within integrator noise.
        assert!(report.rate.max_excess.abs() < 1e-9);
        assert!(report.rate.max_fd_mismatch < 1e-5);
    }

    #[test]
    fn detuned_run_stays_inside_but_does_not_saturate() {
        let h = Hamiltonian::detuned_rabi(2.0, 1.0).unwrap();
        let initial = StateVector::basis(1, 0).unwrap();
        let target = StateVector::basis(1, 1).unwrap();
        let trace = evolve(&h, &initial, &target, 2.0, 1024).unwrap();
        let report = build_envelope_report(&trace, &h, 1.0, DEFAULT_SANDWICH_TOL).unwrap();
        assert!(report.sandwich_violations.is_empty());
        assert!(report.rate.violations.is_empty());
        assert!(!report.saturated);
        assert!(report.max_gap_to_upper > 1e-3);
    }

    #[test]
    fn step_bounds_hit_frozen_secant_values() {
        use std::f64::consts::PI;
        let b = step_bounds(PI / 2.0, PI / 12.0, 1.0).unwrap();
        let lower = b.lower.value().unwrap();
        let upper = b.upper.value().unwrap();
        assert!((lower - 1.154_700_538_379_251).abs() < 1e-12);
        assert!((upper - 2.0).abs() < 1e-12);

        let half = step_bounds(PI / 2.0, PI / 12.0, 0.5).unwrap();
        assert!((half.lower.value().unwrap() - lower.sqrt()).abs() < 1e-12);
        assert!((half.upper.value().unwrap() - 2f64.sqrt()).abs() < 1e-12);

        let open = step_bounds(PI, 0.2, 1.0).unwrap();
        assert!(open.upper.is_divergent());
        let expect = (FRAC_PI_2 - 0.2).cos().recip();
        assert!((open.lower.value().unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_action_bounds_pin_the_initial_overlap() {
        // With no action both bounds collapse to sec(theta0/2) = 1/|<f|i>|.
        let overlap: f64 = 0.3;
        let theta0 = 2.0 * overlap.acos();
        let b = step_bounds(theta0, 0.0, 1.0).unwrap();
        assert!((b.lower.value().unwrap() - 1.0 / overlap).abs() < 1e-12);
        assert!((b.upper.value().unwrap() - 1.0 / overlap).abs() < 1e-12);
    }

    #[test]
    fn bound_values_round_trip_through_json() {
        let fin = serde_json::to_string(&BoundValue::Finite(2.5)).unwrap();
        assert_eq!(fin, "2.5");
        let div = serde_json::to_string(&BoundValue::Divergent).unwrap();
        assert_eq!(div, "\"divergent\"");
        assert_eq!(
            serde_json::from_str::<BoundValue>("2.5").unwrap(),
            BoundValue::Finite(2.5)
        );
        assert_eq!(
            serde_json::from_str::<BoundValue>("\"divergent\"").unwrap(),
            BoundValue::Divergent
        );
        assert!(serde_json::from_str::<BoundValue>("\"open\"").is_err());
    }

    #[test]
    fn envelopes_start_at_the_initial_probability() {
        let action = [0.0, 0.1, 0.2, 0.4];
        let theta0 = 2.0f64 * 0.6f64.acos();
        let env = envelopes(theta0, &action).unwrap();
        assert!((env.upper[0] - 0.36).abs() < 1e-12);
        assert!((env.lower[0] - 0.36).abs() < 1e-12);
        for k in 1..action.len() {
            assert!(env.upper[k] > env.upper[k - 1]);
            assert!(env.lower[k] < env.lower[k - 1]);
        }
        assert!(envelopes(4.0, &action).is_err());
        assert!(envelopes(theta0, &[0.1, f64::NAN]).is_err());
    }

    #[test]
    fn tampered_reports_are_caught() {
        let (trace, h) = rabi_trace(std::f64::consts::PI, 1.0, 256);
        let mut report = build_envelope_report(&trace, &h, 1.0, DEFAULT_SANDWICH_TOL).unwrap();
        assert!(verify_sandwich(&trace, &report, DEFAULT_SANDWICH_TOL)
            .unwrap()
            .is_empty());

        // Pull the upper envelope below the measured curve near the peak.
        let last = report.upper.len() - 1;
        report.upper[last] -= 0.05;
        let violations = verify_sandwich(&trace, &report, DEFAULT_SANDWICH_TOL).unwrap();
        assert!(!violations.is_empty());
        assert!(violations.iter().any(|v| v.index == last));
        assert!(violations[0].excess > 0.04);

        report.times.pop();
        assert!(matches!(
            verify_sandwich(&trace, &report, DEFAULT_SANDWICH_TOL),
            Err(CoreError::GridMismatch { .. })
        ));
    }

    #[test]
    fn rate_check_requires_stored_states() {
        use crate::speedlimit::evolve::{evolve_with, EvolveOptions};
        let h = Hamiltonian::constant_rabi(1.0).unwrap();
        let initial = StateVector::basis(1, 0).unwrap();
        let target = StateVector::basis(1, 1).unwrap();
        let trace = evolve_with(
            &h,
            &initial,
            &target,
            1.0,
            32,
            EvolveOptions {
                store_states: false,
                track_evolving_delta_h: false,
            },
        )
        .unwrap();
        assert!(matches!(
            transition_rate_check(&trace, &h),
            Err(CoreError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn swapped_orientation_is_crossed_immediately() {
        // Start away from the flip-degenerate angle so the two curves are
        // distinct, then misuse the lower curve as an upper bound: the
        // measured probability must break it.
        let h = Hamiltonian::constant_rabi(2.0).unwrap();
        let initial = StateVector::normalized(vec![
            Complex64::new(0.97, 0.0),
            Complex64::new(0.243_104_915_912_204_4, 0.0),
        ])
        .unwrap();
        let target = StateVector::basis(1, 1).unwrap();
        let trace = evolve(&h, &initial, &target, 1.0, 256).unwrap();
        let report = build_envelope_report(&trace, &h, 1.0, DEFAULT_SANDWICH_TOL).unwrap();
        assert!(report.sandwich_violations.is_empty());

        let crossings = (0..trace.p.len())
            .filter(|&k| trace.p[k] > report.lower[k] + EPSILON)
            .count();
        assert!(crossings > 100, "only {crossings} nodes cross");
    }
}
