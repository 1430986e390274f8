//! The `sweep` subcommand: run both searches across a range of register
//! widths, collect first-passage step counts, and fit log-log slopes.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qsearch_core::fit::log_log_slope;
use qsearch_core::geometry::{
    grover_step_estimate, rotor_steps_by_angle, rotor_steps_by_distance, OverlapMagnitude,
};
use qsearch_core::grover::run_grover;
use qsearch_core::rotor::{build_v, run_vsearch};
use qsearch_core::SearchSpec;

use crate::args::{Format, SweepArgs};
use crate::exitcode::CliError;
use crate::output::{sig17, write_output};

/// One register width's measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub n_qubits: u32,
    pub dim: usize,
    /// First step meeting the threshold under the composite iteration, if
    /// the budget sufficed.
    pub grover_steps: Option<usize>,
    pub grover_estimate: f64,
    /// First step meeting the threshold under the rotation iteration.
    pub vsearch_steps: Option<usize>,
    pub vsearch_distance_estimate: f64,
    pub vsearch_angle_estimate: f64,
}

/// The whole sweep, with slopes fitted over the rows that reached the
/// threshold (at least three are needed for a fit).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDocument {
    pub kind: String,
    pub threshold: f64,
    pub rotor_exponent: f64,
    pub rows: Vec<SweepRow>,
    pub grover_slope: Option<f64>,
    pub vsearch_slope: Option<f64>,
}

fn measure_row(n: u32, rotor_exponent: f64, threshold: f64) -> Result<SweepRow, CliError> {
    let dim = 1usize << n;
    let target = dim - 1;

    let grover_spec = SearchSpec::exhaustive(n, target)?;
    let u = OverlapMagnitude::new(grover_spec.coupling()?.norm())?;
    let grover_budget = (FRAC_PI_4 * (dim as f64).sqrt()).ceil() as usize + 8;
    let grover_trace = run_grover(&grover_spec, grover_budget, threshold)?;

    let vsearch_spec = grover_spec.clone().with_rotor_exponent(rotor_exponent)?;
    let alpha = build_v(&vsearch_spec)?.alpha();
    let vsearch_budget = (PI / alpha).ceil() as usize + 8;
    let vsearch_trace = run_vsearch(&vsearch_spec, vsearch_budget, threshold)?;

    Ok(SweepRow {
        n_qubits: n,
        dim,
        grover_steps: grover_trace.first_passage(threshold),
        grover_estimate: grover_step_estimate(u).steps,
        vsearch_steps: vsearch_trace.first_passage(threshold),
        vsearch_distance_estimate: rotor_steps_by_distance(u, rotor_exponent)?.steps,
        vsearch_angle_estimate: rotor_steps_by_angle(u, rotor_exponent)?.steps,
    })
}

/// Fits ln(steps) against ln(dim) over the rows where the threshold was
/// reached; needs at least three such rows.
fn fit_slope(rows: &[SweepRow], pick: impl Fn(&SweepRow) -> Option<usize>) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| pick(r).map(|s| (r.dim as f64, s as f64)))
        .filter(|&(_, s)| s >= 1.0)
        .collect();
    if pairs.len() < 3 {
        return None;
    }
    log_log_slope(&pairs).ok()
}

fn render_csv(doc: &SweepDocument) -> String {
    let mut out = String::new();
    out.push_str(
        "n_qubits,dim,grover_steps,grover_estimate,vsearch_steps,\
         vsearch_distance_estimate,vsearch_angle_estimate\n",
    );
    for r in &doc.rows {
        let g = r.grover_steps.map_or(String::new(), |s| s.to_string());
        let v = r.vsearch_steps.map_or(String::new(), |s| s.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n_qubits,
            r.dim,
            g,
            sig17(r.grover_estimate),
            v,
            sig17(r.vsearch_distance_estimate),
            sig17(r.vsearch_angle_estimate),
        ));
    }
    out.push_str(&format!("# threshold = {}\n", sig17(doc.threshold)));
    out.push_str(&format!(
        "# rotor_exponent = {}\n",
        sig17(doc.rotor_exponent)
    ));
    match doc.grover_slope {
        Some(s) => out.push_str(&format!("# grover_slope = {}\n", sig17(s))),
        None => out.push_str("# grover_slope = none\n"),
    }
    match doc.vsearch_slope {
        Some(s) => out.push_str(&format!("# vsearch_slope = {}\n", sig17(s))),
        None => out.push_str("# vsearch_slope = none\n"),
    }
    out
}

pub fn run(args: &SweepArgs) -> Result<i32, CliError> {
    super::check_threshold(args.threshold)?;
    if args.threshold > 1.0 {
        return Err(CliError::Usage(format!(
            "--threshold above 1 can never be reached in a sweep, got {}",
            args.threshold
        )));
    }
    if args.n_max < args.n_min + 2 {
        return Err(CliError::Usage(format!(
            "sweeps need at least 3 register widths; got {}..={}",
            args.n_min, args.n_max
        )));
    }
    if args.n_max > qsearch_core::state::MAX_QUBITS {
        return Err(CliError::Usage(format!(
            "--n-max must not exceed {}, got {}",
            qsearch_core::state::MAX_QUBITS,
            args.n_max
        )));
    }

    let widths: Vec<u32> = (args.n_min..=args.n_max).collect();
    let measure = || -> Result<Vec<SweepRow>, CliError> {
        widths
            .par_iter()
            .map(|&n| measure_row(n, args.p, args.threshold))
            .collect()
    };

    // QSEARCH_WORKERS caps the rayon pool; unset means rayon's default.
    let rows = match std::env::var("QSEARCH_WORKERS") {
        Ok(raw) => {
            let workers: usize = raw.parse().ok().filter(|&w| w >= 1).ok_or_else(|| {
                CliError::Usage(format!(
                    "QSEARCH_WORKERS must be a positive integer, got {raw:?}"
                ))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))?;
            pool.install(measure)?
        }
        Err(_) => measure()?,
    };

    let grover_slope = fit_slope(&rows, |r| r.grover_steps);
    let vsearch_slope = fit_slope(&rows, |r| r.vsearch_steps);
    let all_reached = rows
        .iter()
        .all(|r| r.grover_steps.is_some() && r.vsearch_steps.is_some());

    let doc = SweepDocument {
        kind: "sweep".into(),
        threshold: args.threshold,
        rotor_exponent: args.p,
        rows,
        grover_slope,
        vsearch_slope,
    };

    let rendered = match args.format {
        Format::Csv => render_csv(&doc),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
    };
    write_output(&args.output, &rendered)?;

    if all_reached {
        Ok(crate::exitcode::SUCCESS)
    } else {
        Ok(crate::exitcode::THRESHOLD_NOT_REACHED)
    }
}
