//! The composite amplitude-amplification iteration and instrumented runs of
//! arbitrary repeated operators.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::geometry::{bargmann_angle, check_rotor_exponent, fs_distance};
use crate::state::{inner_product, StateVector};
use crate::unitary::UnitaryOp;

/// Coupling magnitudes at or below this are treated as exactly zero.
pub const NO_COUPLING_TOL: f64 = 1e-14;

/// Iteration budgets above this are refused outright.
pub const MAX_ITERATIONS: usize = 10_000_000;

/// A search instance: which register, which marked index, how the initial
/// state is prepared, and the rotor exponent used by the rotation variant.
#[derive(Debug, Clone)]
pub struct SearchSpec {
    n_qubits: u32,
    target_index: usize,
    prep: UnitaryOp,
    initial: StateVector,
    rotor_exponent: f64,
}

impl SearchSpec {
    /// Exhaustive search: the |0> register, Walsh-Hadamard preparation, and
    /// rotor exponent 1. The coupling magnitude is exactly 2^{-n/2}.
    pub fn exhaustive(n_qubits: u32, target_index: usize) -> Result<Self> {
        let initial = StateVector::basis(n_qubits, 0)?;
        Self::new(
            n_qubits,
            target_index,
            UnitaryOp::WalshHadamard,
            initial,
            1.0,
        )
    }

    pub fn new(
        n_qubits: u32,
        target_index: usize,
        prep: UnitaryOp,
        initial: StateVector,
        rotor_exponent: f64,
    ) -> Result<Self> {
        // Validates both the register width and the marked index.
        let target = StateVector::basis(n_qubits, target_index)?;
        if initial.dim() != target.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: target.dim(),
                found: initial.dim(),
            });
        }
        if let Some(d) = prep.dim() {
            if d != initial.dim() {
                return Err(CoreError::DimensionMismatch {
                    expected: initial.dim(),
                    found: d,
                });
            }
        }
        check_rotor_exponent(rotor_exponent)?;
        Ok(Self {
            n_qubits,
            target_index,
            prep,
            initial,
            rotor_exponent,
        })
    }

    pub fn with_rotor_exponent(mut self, rotor_exponent: f64) -> Result<Self> {
        check_rotor_exponent(rotor_exponent)?;
        self.rotor_exponent = rotor_exponent;
        Ok(self)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn target_index(&self) -> usize {
        self.target_index
    }

    pub fn prep(&self) -> &UnitaryOp {
        &self.prep
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn rotor_exponent(&self) -> f64 {
        self.rotor_exponent
    }

    /// The marked state pulled back through the preparation. Iterations never
    /// leave the preparation frame, so success is measured against this ray.
    pub fn pulled_back_target(&self) -> Result<StateVector> {
        let target = StateVector::basis(self.n_qubits, self.target_index)?;
        self.prep.inverse().apply(&target)
    }

    /// The coupling c = <psi_f'|psi_i> between the pulled-back target and the
    /// initial state; its magnitude controls every step estimate.
    pub fn coupling(&self) -> Result<Complex64> {
        inner_product(&self.pulled_back_target()?, &self.initial)
    }
}

/// Geometry of the iterate after `step` operator applications.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    /// Complex overlap of the iterate with the pulled-back target.
    pub overlap: Complex64,
    /// |overlap|^2, clamped into [0, 1].
    pub success_prob: f64,
    /// Chordal distance of the iterate from the initial state.
    pub fs_from_initial: f64,
    /// Bargmann angle of the iterate from the initial state.
    pub bargmann_from_initial: f64,
    /// Wall-clock seconds from the start of the run to this record.
    pub elapsed_seconds: f64,
}

/// The per-step records of one iterated run, plus its stopping condition.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    records: Vec<StepRecord>,
    stop_threshold: f64,
    reached: bool,
}

impl IterationTrace {
    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn stop_threshold(&self) -> f64 {
        self.stop_threshold
    }

    /// True when the run halted because the threshold was met (rather than
    /// by exhausting its step budget).
    pub fn reached(&self) -> bool {
        self.reached
    }

    /// Earliest step whose success probability meets `threshold`.
    pub fn first_passage(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.success_prob >= threshold)
            .map(|r| r.step)
    }

    /// The record with the highest success probability (earliest on ties).
    pub fn best(&self) -> &StepRecord {
        self.records
            .iter()
            .reduce(|best, r| if r.success_prob > best.success_prob { r } else { best })
            .expect("a trace always contains the step-0 record")
    }

    /// The step at which the success probability first turns over: the
    /// earliest k whose successor records a strictly lower value. `None`
    /// when the recorded run never stops rising.
    pub fn first_peak(&self) -> Option<usize> {
        self.records
            .windows(2)
            .find(|w| w[1].success_prob < w[0].success_prob)
            .map(|w| w[0].step)
    }
}

/// Runs `op` repeatedly from `initial`, recording projective geometry against
/// `reference` (the ray that defines success) until the success probability
/// meets `stop_threshold` or `max_steps` applications have been made.
///
/// Thresholds above 1 are allowed and never trigger; that is the idiom for
/// "run exactly max_steps". The step-0 record is always present.
pub fn iterate_operator(
    op: &UnitaryOp,
    initial: &StateVector,
    reference: &StateVector,
    max_steps: usize,
    stop_threshold: f64,
) -> Result<IterationTrace> {
    if !stop_threshold.is_finite() || stop_threshold <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "stop_threshold",
            detail: format!("threshold must be finite and positive, got {stop_threshold}"),
        });
    }
    if max_steps == 0 || max_steps > MAX_ITERATIONS {
        return Err(CoreError::InvalidParameter {
            name: "max_steps",
            detail: format!("step budget must lie in 1..={MAX_ITERATIONS}, got {max_steps}"),
        });
    }
    if reference.dim() != initial.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: initial.dim(),
            found: reference.dim(),
        });
    }
    if let Some(d) = op.dim() {
        if d != initial.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: initial.dim(),
                found: d,
            });
        }
    }

    let start = Instant::now();
    let mut records = Vec::new();
    let mut state = initial.clone();
    let mut step = 0;
    loop {
        let overlap = inner_product(reference, &state)?;
        let record = StepRecord {
            step,
            overlap,
            success_prob: overlap.norm_sqr().min(1.0),
            fs_from_initial: fs_distance(initial, &state)?,
            bargmann_from_initial: bargmann_angle(initial, &state)?,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        let done = record.success_prob >= stop_threshold;
        records.push(record);
        if done || step == max_steps {
            break;
        }
        state = op.apply(&state)?;
        step += 1;
    }
    let reached = records
        .last()
        .is_some_and(|r| r.success_prob >= stop_threshold);
    Ok(IterationTrace {
        records,
        stop_threshold,
        reached,
    })
}

/// Builds the composite iteration
/// Q = -(1 - 2|psi_i><psi_i|) U^{-1} (1 - 2|psi_f><psi_f|) U,
/// with factors listed left to right and the rightmost acting first.
pub fn build_q(spec: &SearchSpec) -> Result<UnitaryOp> {
    let target = StateVector::basis(spec.n_qubits, spec.target_index)?;
    Ok(UnitaryOp::Composition(vec![
        UnitaryOp::Scalar(Complex64::new(-1.0, 0.0)),
        UnitaryOp::SelectiveInversion(spec.initial.clone()),
        spec.prep.inverse(),
        UnitaryOp::SelectiveInversion(target),
        spec.prep.clone(),
    ]))
}

/// Runs the composite iteration, stopping at `stop_threshold` or after
/// `max_steps` applications. Fails up front when the instance is uncoupled,
/// because then Q fixes the initial ray and the run cannot move.
pub fn run_grover(
    spec: &SearchSpec,
    max_steps: usize,
    stop_threshold: f64,
) -> Result<IterationTrace> {
    let reference = spec.pulled_back_target()?;
    let coupling = inner_product(&reference, &spec.initial)?;
    if coupling.norm() <= NO_COUPLING_TOL {
        return Err(CoreError::NoCoupling {
            limit: NO_COUPLING_TOL,
        });
    }
    let q = build_q(spec)?;
    iterate_operator(&q, &spec.initial, &reference, max_steps, stop_threshold)
}

/// Success probability of `state` for the given instance:
/// |<psi_f'|state>|^2.
pub fn success_probability(spec: &SearchSpec, state: &StateVector) -> Result<f64> {
    let reference = spec.pulled_back_target()?;
    Ok(inner_product(&reference, state)?.norm_sqr().min(1.0))
}

/// Scans a trace for the first step at which the iterate has returned to the
/// initial ray: cos(theta/2) >= 1 - tol in the Bargmann angle theta from the
/// initial state. Step 0 is excluded — the run starts there.
pub fn detect_slippage(trace: &IterationTrace, tol: f64) -> Result<Option<usize>> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(CoreError::InvalidParameter {
            name: "tol",
            detail: format!("return tolerance must lie in (0, 1e-6], got {tol}"),
        });
    }
    Ok(trace
        .records
        .iter()
        .skip(1)
        .find(|r| (r.bargmann_from_initial / 2.0).cos() >= 1.0 - tol)
        .map(|r| r.step))
}
