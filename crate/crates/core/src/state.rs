//! Normalized state vectors over qubit registers, the Hermitian inner
//! product, and the fast Walsh-Hadamard transform.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CoreError, Result};

/// Tolerated deviation of a state's norm from exactly 1.
pub const NORM_TOL: f64 = 1e-12;

/// Hard cap on register width. 2^26 amplitudes is already a gigabyte of
/// state, well past what an exact simulator should be asked to hold.
pub const MAX_QUBITS: u32 = 26;

/// A unit vector in the 2^n-dimensional Hilbert space of an n-qubit register.
///
/// Amplitudes are stored densely in computational-basis order. Construction
/// enforces the unit-norm invariant, so holding a `StateVector` is proof the
/// vector was within [`NORM_TOL`] of the unit sphere when it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state `|index>`.
    pub fn basis(n_qubits: u32, index: usize) -> Result<Self> {
        let dim = register_dim(n_qubits)?;
        if index >= dim {
            return Err(CoreError::InvalidParameter {
                name: "index",
                detail: format!("basis index {index} out of range for dimension {dim}"),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// The uniform superposition over all 2^n basis states.
    pub fn uniform(n_qubits: u32) -> Result<Self> {
        let dim = register_dim(n_qubits)?;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            n_qubits,
            amps: vec![amp; dim],
        })
    }

    /// Wraps an amplitude vector that is already normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        let deviation = (l2_norm(&amps) - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(CoreError::NotNormalized {
                deviation,
                limit: NORM_TOL,
            });
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales an arbitrary nonzero amplitude vector onto the unit sphere.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        let norm = l2_norm(&amps);
        if norm < 1e-300 {
            return Err(CoreError::InvalidParameter {
                name: "amplitudes",
                detail: "cannot normalize the zero vector".into(),
            });
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self { n_qubits, amps })
    }

    /// A random unit vector: i.i.d. complex Gaussian amplitudes, normalized.
    /// Deterministic in `seed`.
    pub fn random(n_qubits: u32, seed: u64) -> Result<Self> {
        let dim = register_dim(n_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::normalized(amps)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Euclidean norm; within [`NORM_TOL`] of 1 by the construction invariant.
    pub fn norm(&self) -> f64 {
        l2_norm(&self.amps)
    }

    /// Constructor reserved for results of provably norm-preserving maps.
    pub(crate) fn from_invariant(n_qubits: u32, amps: Vec<Complex64>) -> Self {
        debug_assert!((l2_norm(&amps) - 1.0).abs() <= NORM_TOL);
        Self { n_qubits, amps }
    }
}

fn register_dim(n_qubits: u32) -> Result<usize> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(CoreError::InvalidParameter {
            name: "n_qubits",
            detail: format!("register width must lie in 1..={MAX_QUBITS}, got {n_qubits}"),
        });
    }
    Ok(1usize << n_qubits)
}

fn qubits_for_len(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() {
        return Err(CoreError::BadDimension { len });
    }
    let n = len.trailing_zeros();
    if n > MAX_QUBITS {
        return Err(CoreError::BadDimension { len });
    }
    Ok(n)
}

fn l2_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Hermitian inner product `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Applies the n-fold Hadamard transform with the in-place butterfly,
/// O(N log N) time and O(N) space.
///
/// Each stage mixes amplitude pairs differing in one bit and rescales by
/// 1/sqrt(2), so the norm is preserved to machine precision and the
/// transform is exactly its own inverse up to rounding.
pub fn walsh_hadamard(v: &StateVector) -> StateVector {
    let mut amps = v.amplitudes().to_vec();
    let dim = amps.len();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut half = 1;
    while half < dim {
        let mut start = 0;
        while start < dim {
            for i in start..start + half {
                let a = amps[i];
                let b = amps[i + half];
                amps[i] = (a + b) * scale;
                amps[i + half] = (a - b) * scale;
            }
            start += half * 2;
        }
        half *= 2;
    }
    StateVector::from_invariant(v.n_qubits(), amps)
}
