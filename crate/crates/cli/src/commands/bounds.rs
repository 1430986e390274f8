//! The `bounds` subcommand: integrate a Hamiltonian preset, build the full
//! envelope report, and fail loudly when any bound is crossed.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qsearch_core::speedlimit::{build_envelope_report, evolve_with, EnvelopeReport, EvolveOptions, Hamiltonian};
use qsearch_core::StateVector;

use crate::args::{BoundsArgs, PresetArg};
use crate::exitcode::CliError;
use crate::output::write_output;

/// The exact inputs the run was built from, echoed into the report so a
/// reader can reproduce it. Fields irrelevant to the preset are null.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub preset: String,
    pub omega: Option<f64>,
    pub delta: Option<f64>,
    pub amp: Option<f64>,
    pub bias: Option<f64>,
    pub drive_omega: Option<f64>,
    pub dim: usize,
    pub seed: Option<u64>,
    pub terms: Option<usize>,
    pub n_qubits: Option<u32>,
    pub target_index: Option<usize>,
    pub energy: Option<f64>,
    pub target_angle: Option<f64>,
    pub t_end: f64,
    pub steps: usize,
    pub rotor_exponent: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsReport {
    pub kind: String,
    pub config: BoundsConfig,
    pub report: EnvelopeReport,
}

/// A tilted two-level target: sin(a)|0> + cos(a)|1>. Zero tilt is the state
/// orthogonal to the |0> start.
fn tilted_target(angle: f64) -> Result<StateVector, CliError> {
    if !angle.is_finite() {
        return Err(CliError::Usage(format!(
            "--target-angle must be finite, got {angle}"
        )));
    }
    Ok(StateVector::normalized(vec![
        Complex64::new(angle.sin(), 0.0),
        Complex64::new(angle.cos(), 0.0),
    ])?)
}

struct RunSetup {
    h: Hamiltonian,
    initial: StateVector,
    target: StateVector,
    t_end: f64,
    steps: usize,
    config: BoundsConfig,
}

fn plan(args: &BoundsArgs) -> Result<RunSetup, CliError> {
    let base = BoundsConfig {
        preset: preset_name(args.preset).into(),
        omega: None,
        delta: None,
        amp: None,
        bias: None,
        drive_omega: None,
        dim: 2,
        seed: None,
        terms: None,
        n_qubits: None,
        target_index: None,
        energy: None,
        target_angle: None,
        t_end: 0.0,
        steps: 0,
        rotor_exponent: args.p,
        tolerance: args.tol,
    };
    let t_end = args.t_end.unwrap_or(2.0);
    let steps = args.steps.unwrap_or(2048);

    match args.preset {
        PresetArg::ConstantRabi => Ok(RunSetup {
            h: Hamiltonian::constant_rabi(args.omega)?,
            initial: StateVector::basis(1, 0)?,
            target: tilted_target(args.target_angle)?,
            t_end,
            steps,
            config: BoundsConfig {
                omega: Some(args.omega),
                target_angle: Some(args.target_angle),
                t_end,
                steps,
                ..base
            },
        }),
        PresetArg::DetunedRabi => Ok(RunSetup {
            h: Hamiltonian::detuned_rabi(args.omega, args.delta)?,
            initial: StateVector::basis(1, 0)?,
            target: tilted_target(args.target_angle)?,
            t_end,
            steps,
            config: BoundsConfig {
                omega: Some(args.omega),
                delta: Some(args.delta),
                target_angle: Some(args.target_angle),
                t_end,
                steps,
                ..base
            },
        }),
        PresetArg::Driven => Ok(RunSetup {
            h: Hamiltonian::driven(args.amp, args.bias, args.drive_omega)?,
            initial: StateVector::basis(1, 0)?,
            target: tilted_target(args.target_angle)?,
            t_end,
            steps,
            config: BoundsConfig {
                amp: Some(args.amp),
                bias: Some(args.bias),
                drive_omega: Some(args.drive_omega),
                target_angle: Some(args.target_angle),
                t_end,
                steps,
                ..base
            },
        }),
        PresetArg::RandomSmooth => {
            if !args.dim.is_power_of_two() || args.dim < 2 {
                return Err(CliError::Usage(format!(
                    "--dim must be a power of two at least 2, got {}",
                    args.dim
                )));
            }
            let n = args.dim.trailing_zeros();
            let target_index = args.target.unwrap_or(args.dim - 1);
            if target_index >= args.dim {
                return Err(CliError::Usage(format!(
                    "--target {target_index} is out of range for dimension {}",
                    args.dim
                )));
            }
            Ok(RunSetup {
                h: Hamiltonian::random_smooth(args.dim, args.seed, args.terms)?,
                initial: StateVector::basis(n, 0)?,
                target: StateVector::basis(n, target_index)?,
                t_end,
                steps,
                config: BoundsConfig {
                    dim: args.dim,
                    seed: Some(args.seed),
                    terms: Some(args.terms),
                    target_index: Some(target_index),
                    t_end,
                    steps,
                    ..base
                },
            })
        }
        PresetArg::ProjectorPair => {
            let dim = 1usize << args.n;
            let target_index = super::resolve_target(args.n, args.target)?;
            if !(args.energy.is_finite() && args.energy > 0.0) {
                return Err(CliError::Usage(format!(
                    "--energy must be positive, got {}",
                    args.energy
                )));
            }
            let initial = StateVector::uniform(args.n)?;
            let target = StateVector::basis(args.n, target_index)?;
            let h = Hamiltonian::projector_pair(args.energy, &target, &initial)?;
            // Default span: 5% past the arrival time (pi/2) sqrt(N) / E, so
            // the probability peak sits inside the window.
            let arrival = FRAC_PI_2 * (dim as f64).sqrt() / args.energy;
            let t_end = args.t_end.unwrap_or(1.05 * arrival);
            let steps = args
                .steps
                .unwrap_or_else(|| 2048usize.max((128.0 * t_end).ceil() as usize));
            Ok(RunSetup {
                h,
                initial,
                target,
                t_end,
                steps,
                config: BoundsConfig {
                    dim,
                    n_qubits: Some(args.n),
                    target_index: Some(target_index),
                    energy: Some(args.energy),
                    t_end,
                    steps,
                    ..base
                },
            })
        }
    }
}

fn preset_name(p: PresetArg) -> &'static str {
    match p {
        PresetArg::ConstantRabi => "constant-rabi",
        PresetArg::DetunedRabi => "detuned-rabi",
        PresetArg::Driven => "driven",
        PresetArg::RandomSmooth => "random-smooth",
        PresetArg::ProjectorPair => "projector-pair",
    }
}

pub fn run(args: &BoundsArgs) -> Result<i32, CliError> {
    let setup = plan(args)?;
    let trace = evolve_with(
        &setup.h,
        &setup.initial,
        &setup.target,
        setup.t_end,
        setup.steps,
        EvolveOptions {
            store_states: true,
            track_evolving_delta_h: false,
        },
    )?;
    let report = build_envelope_report(&trace, &setup.h, args.p, args.tol)?;

    let sandwich = report.sandwich_violations.len();
    let rate = report.rate.violations.len();

    let doc = BoundsReport {
        kind: "bounds-report".into(),
        config: setup.config,
        report,
    };
    let mut rendered = serde_json::to_string_pretty(&doc)?;
    rendered.push('\n');
    write_output(&args.output, &rendered)?;

    if sandwich == 0 && rate == 0 {
        Ok(crate::exitcode::SUCCESS)
    } else {
        Err(CliError::BoundViolations(format!(
            "{sandwich} sandwich and {rate} rate violations (report was still written)"
        )))
    }
}
