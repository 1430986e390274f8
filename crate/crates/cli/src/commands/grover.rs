//! The `grover` subcommand: iterate the composite operator on an exhaustive
//! search instance and emit the trace.

use std::f64::consts::FRAC_PI_4;

use qsearch_core::geometry::{grover_step_estimate, OverlapMagnitude};
use qsearch_core::grover::run_grover;
use qsearch_core::{SearchSpec, StateVector};

use crate::args::{Format, GroverArgs};
use crate::exitcode::CliError;
use crate::output::{write_output, EstimateDoc, TraceDocument};

use super::{build_prep, check_threshold, resolve_target};

/// Default step budget: the quarter-period estimate plus slack, so a
/// reachable threshold is met without the user tuning anything.
fn default_budget(dim: usize) -> usize {
    (FRAC_PI_4 * (dim as f64).sqrt()).ceil() as usize + 8
}

pub fn run(args: &GroverArgs) -> Result<i32, CliError> {
    check_threshold(args.threshold)?;
    let target = resolve_target(args.n, args.target)?;
    let dim = 1usize << args.n;
    let prep = build_prep(args.prep, dim, args.seed)?;
    let initial = StateVector::basis(args.n, 0)?;
    let spec = SearchSpec::new(args.n, target, prep, initial, 1.0)?;

    let coupling = spec.coupling()?.norm();
    let max_steps = args.max_steps.unwrap_or_else(|| default_budget(dim));
    let trace = run_grover(&spec, max_steps, args.threshold)?;

    let u = OverlapMagnitude::new(coupling)?;
    let estimates = vec![EstimateDoc::from(grover_step_estimate(u))];
    let doc = TraceDocument::new(
        "grover",
        &spec,
        args.prep.as_str(),
        args.seed,
        None,
        &trace,
        estimates,
    )?;

    let rendered = match args.format {
        Format::Csv => doc.to_csv(),
        Format::Json => doc.to_json()?,
    };
    write_output(&args.output, &rendered)?;

    if trace.reached() {
        Ok(crate::exitcode::SUCCESS)
    } else {
        Ok(crate::exitcode::THRESHOLD_NOT_REACHED)
    }
}
