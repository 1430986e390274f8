//! Exact state-vector laboratory for amplitude-amplification search.
//!
//! Three layers build on one another:
//!
//! * matrix-free linear algebra over qubit registers ([`state`], [`frame`],
//!   [`unitary`]), with every state held to unit norm by construction;
//! * the composite search iteration and its controlled-rotation variant
//!   ([`grover`], [`rotor`]), instrumented step by step with projective-space
//!   geometry ([`geometry`]) and scaling fits ([`fit`]);
//! * Schrodinger integration with energy-spread bookkeeping, used to check
//!   fidelity envelopes and iteration-count bounds ([`speedlimit`]).

pub mod error;
pub mod fit;
pub mod frame;
pub mod geometry;
pub mod grover;
pub mod rotor;
pub mod speedlimit;
pub mod state;
pub mod unitary;

pub use error::{CoreError, Result};
pub use frame::{make_frame, SubspaceFrame};
pub use geometry::OverlapMagnitude;
pub use grover::{IterationTrace, SearchSpec, StepRecord};
pub use state::{inner_product, walsh_hadamard, StateVector};
pub use unitary::UnitaryOp;
