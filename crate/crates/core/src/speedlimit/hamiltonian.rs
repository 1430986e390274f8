//! Hamiltonian models for the speed-limit experiments.
//!
//! Each model carries an exact `apply` fast path where the structure allows
//! one (rank-two projector sums in particular), plus a dense `matrix_at`
//! fallback used by the diagnostics.

use std::f64::consts::SQRT_2;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::state::StateVector;

const HERMITICITY_TOL: f64 = 1e-12;

/// Names the Hamiltonian families the tooling knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Constant transverse coupling between two levels.
    ConstantRabi,
    /// Transverse coupling plus a level splitting.
    DetunedRabi,
    /// Sinusoidally driven transverse coupling.
    Driven,
    /// Random time-dependent Hermitian matrix with smooth Fourier entries.
    RandomSmooth,
    /// Sum of projectors onto two fixed rays, scaled by one energy.
    ProjectorPair,
    /// A caller-supplied constant Hermitian matrix.
    Constant,
    /// A caller-supplied closure.
    Custom,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::ConstantRabi => "constant-rabi",
            Preset::DetunedRabi => "detuned-rabi",
            Preset::Driven => "driven",
            Preset::RandomSmooth => "random-smooth",
            Preset::ProjectorPair => "projector-pair",
            Preset::Constant => "constant",
            Preset::Custom => "custom",
        }
    }
}

enum Form {
    Static(Array2<Complex64>),
    /// amp * cos(omega t + bias-phase) sigma_x style driving on two levels.
    Driven {
        amp: f64,
        bias: f64,
        omega: f64,
    },
    /// Every entry is an independent truncated Fourier series in t.
    Fourier {
        base: Array2<Complex64>,
        cos_terms: Vec<Array2<Complex64>>,
        sin_terms: Vec<Array2<Complex64>>,
        omega: f64,
    },
    /// energy * (|a><a| + |b><b|); applied in O(dim) without the matrix.
    RankTwo {
        energy: f64,
        a: StateVector,
        b: StateVector,
    },
    Custom(Box<dyn Fn(f64) -> Array2<Complex64> + Send + Sync>),
}

/// A (possibly time-dependent) Hermitian generator of the dynamics.
pub struct Hamiltonian {
    dim: usize,
    preset: Preset,
    form: Form,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("dim", &self.dim)
            .field("preset", &self.preset)
            .finish_non_exhaustive()
    }
}

fn check_square(m: &Array2<Complex64>) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c || r < 2 {
        return Err(CoreError::BadDimension { len: r.max(c) });
    }
    Ok(r)
}

fn hermiticity_deviation_of(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl Hamiltonian {
    /// H = (omega/2) sigma_x on two levels.
    pub fn constant_rabi(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega != 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "omega",
                detail: format!("coupling must be finite and nonzero, got {omega}"),
            });
        }
        let h = omega / 2.0;
        let m = Array2::from_shape_vec(
            (2, 2),
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .expect("2x2 shape");
        Ok(Self {
            dim: 2,
            preset: Preset::ConstantRabi,
            form: Form::Static(m),
        })
    }

    /// H = (omega/2) sigma_x + (delta/2) sigma_z on two levels.
    pub fn detuned_rabi(omega: f64, delta: f64) -> Result<Self> {
        if !(omega.is_finite() && delta.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "omega",
                detail: "coupling and detuning must be finite".into(),
            });
        }
        let m = Array2::from_shape_vec(
            (2, 2),
            vec![
                Complex64::new(delta / 2.0, 0.0),
                Complex64::new(omega / 2.0, 0.0),
                Complex64::new(omega / 2.0, 0.0),
                Complex64::new(-delta / 2.0, 0.0),
            ],
        )
        .expect("2x2 shape");
        Ok(Self {
            dim: 2,
            preset: Preset::DetunedRabi,
            form: Form::Static(m),
        })
    }

    /// H(t) = (amp/2)(bias + cos(omega t)) sigma_x on two levels.
    pub fn driven(amp: f64, bias: f64, omega: f64) -> Result<Self> {
        if !(amp.is_finite() && bias.is_finite() && omega.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "amp",
                detail: "drive parameters must be finite".into(),
            });
        }
        Ok(Self {
            dim: 2,
            preset: Preset::Driven,
            form: Form::Driven { amp, bias, omega },
        })
    }

    /// A smooth random Hermitian family: every independent entry is its own
    /// truncated Fourier series with `terms` harmonics of base frequency 1.
    ///
    /// The 1/sqrt(2 terms + 1) scale keeps the typical entry size
    /// comparable across truncation orders.
    pub fn random_smooth(dim: usize, seed: u64, terms: usize) -> Result<Self> {
        if dim < 2 {
            return Err(CoreError::BadDimension { len: dim });
        }
        if terms == 0 || terms > 64 {
            return Err(CoreError::InvalidParameter {
                name: "terms",
                detail: format!("harmonic count must be in 1..=64, got {terms}"),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / ((2 * terms + 1) as f64).sqrt();
        let gaussian_hermitian = |rng: &mut ChaCha8Rng| -> Array2<Complex64> {
            let mut m = Array2::zeros((dim, dim));
            for i in 0..dim {
                let d: f64 = rng.sample(StandardNormal);
                m[(i, i)] = Complex64::new(d * scale, 0.0);
                for j in (i + 1)..dim {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let z = Complex64::new(re, im) * (scale / SQRT_2);
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
            m
        };
        let base = gaussian_hermitian(&mut rng);
        let cos_terms: Vec<_> = (0..terms).map(|_| gaussian_hermitian(&mut rng)).collect();
        let sin_terms: Vec<_> = (0..terms).map(|_| gaussian_hermitian(&mut rng)).collect();
        Ok(Self {
            dim,
            preset: Preset::RandomSmooth,
            form: Form::Fourier {
                base,
                cos_terms,
                sin_terms,
                omega: 1.0,
            },
        })
    }

    /// H = energy (|a><a| + |b><b|) for two fixed rays.
    pub fn projector_pair(energy: f64, a: &StateVector, b: &StateVector) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "energy",
                detail: format!("projector scale must be positive and finite, got {energy}"),
            });
        }
        if a.dim() != b.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(Self {
            dim: a.dim(),
            preset: Preset::ProjectorPair,
            form: Form::RankTwo {
                energy,
                a: a.clone(),
                b: b.clone(),
            },
        })
    }

    /// Wraps a constant Hermitian matrix.
    pub fn constant(m: Array2<Complex64>) -> Result<Self> {
        let dim = check_square(&m)?;
        let dev = hermiticity_deviation_of(&m);
        if dev > HERMITICITY_TOL {
            return Err(CoreError::NonHermitian { deviation: dev });
        }
        Ok(Self {
            dim,
            preset: Preset::Constant,
            form: Form::Static(m),
        })
    }

    /// Wraps an arbitrary time-dependent matrix function. Hermiticity is
    /// spot-checked at evolution time, not here.
    pub fn custom<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Array2<Complex64> + Send + Sync + 'static,
    {
        if dim < 2 {
            return Err(CoreError::BadDimension { len: dim });
        }
        Ok(Self {
            dim,
            preset: Preset::Custom,
            form: Form::Custom(Box::new(f)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn preset(&self) -> Preset {
        self.preset
    }

    /// True when H(t) does not actually depend on t.
    pub fn is_static(&self) -> bool {
        matches!(self.form, Form::Static(_) | Form::RankTwo { .. })
    }

    /// Applies H(t) to raw amplitudes, using structure where available.
    pub fn apply(&self, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        match &self.form {
            Form::RankTwo { energy, a, b } => {
                let mut ca = Complex64::new(0.0, 0.0);
                let mut cb = Complex64::new(0.0, 0.0);
                for (k, x) in v.iter().enumerate() {
                    ca += a.amplitudes()[k].conj() * x;
                    cb += b.amplitudes()[k].conj() * x;
                }
                Ok((0..self.dim)
                    .map(|k| *energy * (ca * a.amplitudes()[k] + cb * b.amplitudes()[k]))
                    .collect())
            }
            Form::Driven { amp, bias, omega } => {
                let h = 0.5 * amp * (bias + (omega * t).cos());
                Ok(vec![h * v[1], h * v[0]])
            }
            Form::Static(m) => Ok(matvec(m, v)),
            Form::Fourier { .. } | Form::Custom(_) => Ok(matvec(&self.matrix_at(t), v)),
        }
    }

    /// The dense matrix H(t).
    pub fn matrix_at(&self, t: f64) -> Array2<Complex64> {
        match &self.form {
            Form::Static(m) => m.clone(),
            Form::Driven { amp, bias, omega } => {
                let h = Complex64::new(0.5 * amp * (bias + (omega * t).cos()), 0.0);
                Array2::from_shape_vec(
                    (2, 2),
                    vec![Complex64::new(0.0, 0.0), h, h, Complex64::new(0.0, 0.0)],
                )
                .expect("2x2 shape")
            }
            Form::Fourier {
                base,
                cos_terms,
                sin_terms,
                omega,
            } => {
                let mut m = base.clone();
                for (k, c) in cos_terms.iter().enumerate() {
                    let w = ((k + 1) as f64 * omega * t).cos();
                    m.scaled_add(Complex64::new(w, 0.0), c);
                }
                for (k, s) in sin_terms.iter().enumerate() {
                    let w = ((k + 1) as f64 * omega * t).sin();
                    m.scaled_add(Complex64::new(w, 0.0), s);
                }
                m
            }
            Form::RankTwo { energy, a, b } => {
                let mut m = Array2::zeros((self.dim, self.dim));
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        m[(i, j)] = Complex64::new(*energy, 0.0)
                            * (a.amplitudes()[i] * a.amplitudes()[j].conj()
                                + b.amplitudes()[i] * b.amplitudes()[j].conj());
                    }
                }
                m
            }
            Form::Custom(f) => f(t),
        }
    }

    /// Worst Hermiticity violation of the sampled matrix at time t.
    pub fn hermiticity_deviation(&self, t: f64) -> f64 {
        hermiticity_deviation_of(&self.matrix_at(t))
    }
}

fn matvec(m: &Array2<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += m[(i, j)] * v[j];
        }
        out[i] = acc;
    }
    out
}

/// Energy spread sqrt(<H^2> - <H>^2) of `reference` under a fixed matrix.
pub fn delta_h(m: &Array2<Complex64>, reference: &StateVector) -> Result<f64> {
    let dim = check_square(m)?;
    if dim != reference.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            found: reference.dim(),
        });
    }
    let dev = hermiticity_deviation_of(m);
    if dev > HERMITICITY_TOL {
        return Err(CoreError::NonHermitian { deviation: dev });
    }
    let image = matvec(m, reference.amplitudes());
    variance_from_image(reference, &image)
}

/// Energy spread of `reference` under H(t).
pub fn delta_h_at(h: &Hamiltonian, t: f64, reference: &StateVector) -> Result<f64> {
    if h.dim() != reference.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: h.dim(),
            found: reference.dim(),
        });
    }
    let image = h.apply(t, reference.amplitudes())?;
    variance_from_image(reference, &image)
}

/// Spread from a state and its image under H: <H> = <psi|H psi>,
/// <H^2> = |H psi|^2 when psi is normalized.
pub(crate) fn variance_from_image(state: &StateVector, image: &[Complex64]) -> Result<f64> {
    let mean: Complex64 = state
        .amplitudes()
        .iter()
        .zip(image)
        .map(|(a, b)| a.conj() * b)
        .sum();
    if mean.im.abs() > 1e-9 {
        return Err(CoreError::NumericalConsistency {
            detail: format!("energy expectation has imaginary part {}", mean.im),
        });
    }
    let second: f64 = image.iter().map(|z| z.norm_sqr()).sum();
    let var = second - mean.re * mean.re;
    if var < -1e-9 {
        return Err(CoreError::NumericalConsistency {
            detail: format!("negative energy variance {var}"),
        });
    }
    Ok(var.max(0.0).sqrt())
}
