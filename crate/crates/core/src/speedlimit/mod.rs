//! Continuous-time evolution and quantum-speed-limit verification.
//!
//! The submodules split the work into three layers: Hamiltonian models with
//! exact fast paths, a norm-audited RK4 integrator that records the
//! transition probability and the energy-spread action, and the
//! envelope/bound checks that sandwich the recorded curve.

mod envelope;
mod evolve;
mod hamiltonian;

pub use envelope::{
    build_envelope_report, envelopes, step_bounds, transition_rate_check, verify_sandwich,
    BoundValue, EnvelopeReport, Envelopes, RateCheck, RateViolation, SandwichViolation,
    StepBounds, DEFAULT_SANDWICH_TOL, ORIENTATION_NOTE,
};
pub use evolve::{evolve, evolve_with, EvolutionTrace, EvolveOptions};
pub use hamiltonian::{delta_h, delta_h_at, Hamiltonian, Preset};
