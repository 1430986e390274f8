//! Unitary operators kept in applied form.
//!
//! Only genuinely unstructured operators are stored as matrices. Everything
//! the search machinery needs — the Walsh-Hadamard basis change, selective
//! phase inversions, rotations supported on a plane, and compositions of
//! those — applies to a state in O(N) or O(N log N) without ever
//! materializing N x N storage.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CoreError, Result};
use crate::frame::SubspaceFrame;
use crate::state::{inner_product, walsh_hadamard, StateVector};

/// Tolerated max-entry deviation of U†U from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Tolerated max-entry deviation of a generator from its own adjoint.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense matrices above this dimension are refused; the point of the enum is
/// that nothing structured should ever need one.
pub const MAX_DENSE_DIM: usize = 4096;

/// A unitary operator in whichever form applies cheapest.
#[derive(Debug, Clone)]
pub enum UnitaryOp {
    /// Explicit matrix with no exploitable structure. Build through
    /// [`UnitaryOp::dense`], which checks unitarity.
    Dense(Array2<Complex64>),
    /// The n-fold Hadamard transform on any register; self-inverse.
    WalshHadamard,
    /// The reflection 1 - 2|phi><phi| that flips the sign of the component
    /// along |phi> and fixes the orthogonal complement.
    SelectiveInversion(StateVector),
    /// exp(-i(angle/2) G) for a Hermitian generator G supported on a plane;
    /// acts as the identity off the plane.
    TwoPlaneRotation(PlaneRotation),
    /// Product of factors in the written order: the rightmost acts first,
    /// exactly like a matrix product.
    Composition(Vec<UnitaryOp>),
    /// A global phase. Build through [`UnitaryOp::scalar`].
    Scalar(Complex64),
}

/// The data of a plane-supported rotation: the frame spanning the plane, the
/// rotation parameter, and the precomputed 2x2 unitary block in frame
/// coordinates.
#[derive(Debug, Clone)]
pub struct PlaneRotation {
    frame: SubspaceFrame,
    angle: f64,
    block: [[Complex64; 2]; 2],
}

impl PlaneRotation {
    pub fn frame(&self) -> &SubspaceFrame {
        &self.frame
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The 2x2 unitary acting on coordinates (e0, e1).
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        self.block
    }
}

impl UnitaryOp {
    /// Wraps an explicit matrix, verifying squareness and unitarity.
    pub fn dense(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(CoreError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() < 2 || matrix.nrows() > MAX_DENSE_DIM {
            return Err(CoreError::InvalidParameter {
                name: "matrix",
                detail: format!(
                    "dense operators must have dimension in 2..={MAX_DENSE_DIM}, got {}",
                    matrix.nrows()
                ),
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOL {
            return Err(CoreError::NonUnitary { deviation });
        }
        Ok(Self::Dense(matrix))
    }

    /// Wraps a global phase, verifying it lies on the unit circle.
    pub fn scalar(z: Complex64) -> Result<Self> {
        let deviation = (z.norm() - 1.0).abs();
        if deviation > UNITARITY_TOL {
            return Err(CoreError::NonUnitary { deviation });
        }
        Ok(Self::Scalar(z))
    }

    /// Dimension this operator is pinned to, or `None` when it acts on any
    /// register (Walsh-Hadamard, scalars, and compositions of only those).
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Dense(m) => Some(m.nrows()),
            Self::WalshHadamard | Self::Scalar(_) => None,
            Self::SelectiveInversion(phi) => Some(phi.dim()),
            Self::TwoPlaneRotation(rot) => Some(rot.frame.dim()),
            Self::Composition(ops) => ops.iter().find_map(Self::dim),
        }
    }

    /// Applies the operator, re-validating the unit-norm invariant on the
    /// result.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        match self {
            Self::Dense(m) => {
                if m.ncols() != v.dim() {
                    return Err(CoreError::DimensionMismatch {
                        expected: m.ncols(),
                        found: v.dim(),
                    });
                }
                let out = m.dot(&ArrayView1::from(v.amplitudes()));
                StateVector::from_amplitudes(out.to_vec())
            }
            Self::WalshHadamard => Ok(walsh_hadamard(v)),
            Self::SelectiveInversion(phi) => {
                let c = inner_product(phi, v)?;
                let two_c = 2.0 * c;
                let amps = v
                    .amplitudes()
                    .iter()
                    .zip(phi.amplitudes())
                    .map(|(vk, pk)| vk - two_c * pk)
                    .collect();
                StateVector::from_amplitudes(amps)
            }
            Self::TwoPlaneRotation(rot) => {
                let a0 = inner_product(rot.frame.e0(), v)?;
                let a1 = inner_product(rot.frame.e1(), v)?;
                let b = rot.block;
                // The operator is identity plus a rank-2 update: only the
                // in-plane coordinates change.
                let d0 = (b[0][0] - 1.0) * a0 + b[0][1] * a1;
                let d1 = b[1][0] * a0 + (b[1][1] - 1.0) * a1;
                let e0 = rot.frame.e0().amplitudes();
                let e1 = rot.frame.e1().amplitudes();
                let amps = v
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(k, vk)| vk + d0 * e0[k] + d1 * e1[k])
                    .collect();
                StateVector::from_amplitudes(amps)
            }
            Self::Composition(ops) => {
                let mut current = v.clone();
                for op in ops.iter().rev() {
                    current = op.apply(&current)?;
                }
                Ok(current)
            }
            Self::Scalar(z) => {
                let amps = v.amplitudes().iter().map(|a| a * z).collect();
                StateVector::from_amplitudes(amps)
            }
        }
    }

    /// The inverse operator, computed structurally (adjoint blocks, reversed
    /// factor order) rather than numerically.
    pub fn inverse(&self) -> Self {
        match self {
            Self::Dense(m) => Self::Dense(adjoint(m)),
            Self::WalshHadamard => Self::WalshHadamard,
            Self::SelectiveInversion(phi) => Self::SelectiveInversion(phi.clone()),
            Self::TwoPlaneRotation(rot) => Self::TwoPlaneRotation(PlaneRotation {
                frame: rot.frame.clone(),
                angle: -rot.angle,
                block: adjoint2(rot.block),
            }),
            Self::Composition(ops) => {
                Self::Composition(ops.iter().rev().map(Self::inverse).collect())
            }
            Self::Scalar(z) => Self::Scalar(z.conj()),
        }
    }
}

/// Builds exp(-i(angle/2) G) where G is a Hermitian 2x2 generator given in
/// the frame's coordinates, extended by the identity off the plane.
///
/// The exponential is taken in closed form: writing G = w*1 + M with M
/// traceless, M^2 = m^2 * 1, so
/// exp(-i theta G) = e^{-i theta w} (cos(theta m) - i sin(theta m)/m * M).
pub fn two_plane_rotation(
    frame: &SubspaceFrame,
    generator: [[Complex64; 2]; 2],
    angle: f64,
) -> Result<UnitaryOp> {
    if !angle.is_finite() {
        return Err(CoreError::InvalidParameter {
            name: "angle",
            detail: format!("rotation angle must be finite, got {angle}"),
        });
    }
    let g = generator;
    let herm_deviation = g[0][0]
        .im
        .abs()
        .max(g[1][1].im.abs())
        .max((g[0][1] - g[1][0].conj()).norm());
    if herm_deviation > HERMITICITY_TOL {
        return Err(CoreError::NonHermitian {
            deviation: herm_deviation,
        });
    }

    let w = (g[0][0].re + g[1][1].re) / 2.0;
    let d = (g[0][0].re - g[1][1].re) / 2.0;
    let off = g[0][1];
    let m = (d * d + off.norm_sqr()).sqrt();
    let theta = angle / 2.0;
    let phase = Complex64::from_polar(1.0, -theta * w);
    let block = if m < 1e-300 {
        [
            [phase, Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), phase],
        ]
    } else {
        let c = (theta * m).cos();
        let neg_i_s = Complex64::new(0.0, -(theta * m).sin() / m);
        [
            [phase * (c + neg_i_s * d), phase * (neg_i_s * off)],
            [phase * (neg_i_s * off.conj()), phase * (c - neg_i_s * d)],
        ]
    };
    Ok(UnitaryOp::TwoPlaneRotation(PlaneRotation {
        frame: frame.clone(),
        angle,
        block,
    }))
}

/// A Haar-distributed random unitary: a complex Ginibre matrix orthonormalized
/// column by column (two-pass Gram-Schmidt for stability), with each column
/// rotated so the corresponding diagonal of the triangular factor is real and
/// positive. Deterministic in `seed`.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Result<UnitaryOp> {
    if !(2..=MAX_DENSE_DIM).contains(&dim) {
        return Err(CoreError::InvalidParameter {
            name: "dim",
            detail: format!("dimension must lie in 2..={MAX_DENSE_DIM}, got {dim}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let a = Array2::from_shape_fn((dim, dim), |_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * scale
    });

    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut col: Vec<Complex64> = a.column(j).to_vec();
        for _ in 0..2 {
            for qi in &q {
                let r: Complex64 = qi.iter().zip(&col).map(|(x, y)| x.conj() * y).sum();
                for (ck, xk) in col.iter_mut().zip(qi) {
                    *ck -= r * xk;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-150 {
            return Err(CoreError::NumericalConsistency {
                detail: "Ginibre sample was numerically rank-deficient".into(),
            });
        }
        for ck in &mut col {
            *ck /= norm;
        }
        // Phase fix: scale the column so <q_j|a_j> is real positive. Under
        // Gram-Schmidt this is already (nearly) the case; applying it keeps
        // the construction faithful to the Haar recipe.
        let r_jj: Complex64 = col
            .iter()
            .zip(a.column(j))
            .map(|(x, y)| x.conj() * y)
            .sum();
        if r_jj.norm() > 0.0 {
            let ph = r_jj / r_jj.norm();
            for ck in &mut col {
                *ck *= ph;
            }
        }
        q.push(col);
    }
    let matrix = Array2::from_shape_fn((dim, dim), |(i, j)| q[j][i]);
    UnitaryOp::dense(matrix)
}

/// Max-entry deviation of U†U from the identity.
pub fn unitarity_deviation(matrix: &Array2<Complex64>) -> f64 {
    let conj = matrix.mapv(|z| z.conj());
    let gram = conj.t().dot(matrix);
    let mut worst = 0.0f64;
    for ((i, j), z) in gram.indexed_iter() {
        let expect = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((z - expect).norm());
    }
    worst
}

fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.mapv(|z| z.conj()).reversed_axes()
}

fn adjoint2(b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [b[0][0].conj(), b[1][0].conj()],
        [b[0][1].conj(), b[1][1].conj()],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::make_frame;

    const EPSILON: f64 = 1e-12;

    fn sigma_x() -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        ]
    }

    #[test]
    fn dense_rejects_non_unitary() {
        let m = Array2::from_shape_fn((2, 2), |_| Complex64::new(0.7, 0.0));
        assert!(matches!(
            UnitaryOp::dense(m),
            Err(CoreError::NonUnitary { .. })
        ));
    }

    #[test]
    fn scalar_must_be_a_phase() {
        assert!(UnitaryOp::scalar(Complex64::new(0.5, 0.0)).is_err());
        assert!(UnitaryOp::scalar(Complex64::from_polar(1.0, 2.1)).is_ok());
    }

    #[test]
    fn selective_inversion_flips_only_the_marked_component() {
        let phi = StateVector::basis(2, 2).unwrap();
        let op = UnitaryOp::SelectiveInversion(phi.clone());
        let flipped = op.apply(&phi).unwrap();
        assert!((flipped.amplitudes()[2] + Complex64::new(1.0, 0.0)).norm() < EPSILON);

        let other = StateVector::basis(2, 1).unwrap();
        let fixed = op.apply(&other).unwrap();
        assert!((fixed.amplitudes()[1] - Complex64::new(1.0, 0.0)).norm() < EPSILON);
    }

    #[test]
    fn walsh_hadamard_variant_matches_free_function() {
        let v = StateVector::random(4, 13).unwrap();
        let via_op = UnitaryOp::WalshHadamard.apply(&v).unwrap();
        let direct = walsh_hadamard(&v);
        assert_eq!(via_op.amplitudes(), direct.amplitudes());
    }

    #[test]
    fn plane_rotation_rotates_e0_toward_e1() {
        let frame = make_frame(
            &StateVector::basis(1, 0).unwrap(),
            &StateVector::basis(1, 1).unwrap(),
        )
        .unwrap();
        let alpha = std::f64::consts::FRAC_PI_2;
        let op = two_plane_rotation(&frame, sigma_x(), alpha).unwrap();
        let out = op.apply(frame.e0()).unwrap();
        // exp(-i(alpha/2) sigma_x)|0> = cos(alpha/2)|0> - i sin(alpha/2)|1>
        assert!((out.amplitudes()[0].re - (alpha / 2.0).cos()).abs() < EPSILON);
        assert!((out.amplitudes()[1].im + (alpha / 2.0).sin()).abs() < EPSILON);
    }

    #[test]
    fn plane_rotation_fixes_the_orthogonal_complement() {
        let frame = make_frame(
            &StateVector::basis(2, 0).unwrap(),
            &StateVector::basis(2, 1).unwrap(),
        )
        .unwrap();
        let op = two_plane_rotation(&frame, sigma_x(), 1.3).unwrap();
        let off_plane = StateVector::basis(2, 3).unwrap();
        let out = op.apply(&off_plane).unwrap();
        assert!((out.amplitudes()[3] - Complex64::new(1.0, 0.0)).norm() < EPSILON);
    }

    #[test]
    fn plane_rotation_rejects_non_hermitian_generator() {
        let frame = make_frame(
            &StateVector::basis(1, 0).unwrap(),
            &StateVector::basis(1, 1).unwrap(),
        )
        .unwrap();
        let mut g = sigma_x();
        g[0][1] = Complex64::new(0.0, 0.5);
        g[1][0] = Complex64::new(0.0, 0.5); // not the conjugate: non-Hermitian
        assert!(matches!(
            two_plane_rotation(&frame, g, 1.0),
            Err(CoreError::NonHermitian { .. })
        ));
    }

    #[test]
    fn inverse_undoes_a_composition() {
        let haar = haar_random_unitary(8, 21).unwrap();
        let phi = StateVector::random(3, 22).unwrap();
        let op = UnitaryOp::Composition(vec![
            UnitaryOp::WalshHadamard,
            UnitaryOp::SelectiveInversion(phi),
            haar,
        ]);
        let v = StateVector::random(3, 23).unwrap();
        let round_trip = op.inverse().apply(&op.apply(&v).unwrap()).unwrap();
        let max_diff = v
            .amplitudes()
            .iter()
            .zip(round_trip.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-11);
    }

    #[test]
    fn haar_random_unitary_is_unitary_and_deterministic() {
        let u1 = haar_random_unitary(16, 4).unwrap();
        let u2 = haar_random_unitary(16, 4).unwrap();
        let (UnitaryOp::Dense(m1), UnitaryOp::Dense(m2)) = (&u1, &u2) else {
            panic!("haar sampler must produce dense matrices");
        };
        assert_eq!(m1, m2);
        assert!(unitarity_deviation(m1) < UNITARITY_TOL);

        let UnitaryOp::Dense(m3) = haar_random_unitary(16, 5).unwrap() else {
            unreachable!()
        };
        assert_ne!(m1, &m3);
    }

    #[test]
    fn composition_applies_rightmost_first() {
        // Flip |0> -> (|0> - |1>)/sqrt(2) requires H after the inversion, so
        // Composition([H, inversion]) must invert first.
        let inversion = UnitaryOp::SelectiveInversion(StateVector::basis(1, 0).unwrap());
        let op = UnitaryOp::Composition(vec![UnitaryOp::WalshHadamard, inversion]);
        let out = op.apply(&StateVector::basis(1, 0).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0].re + s).abs() < EPSILON);
        assert!((out.amplitudes()[1].re + s).abs() < EPSILON);
    }
}
