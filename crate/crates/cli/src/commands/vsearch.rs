//! The `vsearch` subcommand: iterate the controlled-rotation operator and
//! emit the trace.

use std::f64::consts::PI;

use qsearch_core::geometry::{rotor_steps_by_angle, rotor_steps_by_distance, OverlapMagnitude};
use qsearch_core::rotor::{build_v, run_vsearch};
use qsearch_core::{SearchSpec, StateVector};

use crate::args::{Format, VsearchArgs};
use crate::exitcode::CliError;
use crate::output::{write_output, EstimateDoc, TraceDocument};

use super::{build_prep, check_threshold, resolve_target};

pub fn run(args: &VsearchArgs) -> Result<i32, CliError> {
    check_threshold(args.threshold)?;
    let target = resolve_target(args.n, args.target)?;
    let dim = 1usize << args.n;
    let prep = build_prep(args.prep, dim, args.seed)?;
    let initial = StateVector::basis(args.n, 0)?;
    let spec = SearchSpec::new(args.n, target, prep, initial, args.p)?;

    let v = build_v(&spec)?;
    let alpha = v.alpha();
    let coupling = v.frame().overlap().norm();

    // Half a rotation period covers the first success peak; the slack
    // absorbs rounding for very small couplings.
    let max_steps = args
        .max_steps
        .unwrap_or_else(|| (PI / alpha).ceil() as usize + 8);
    let trace = run_vsearch(&spec, max_steps, args.threshold)?;

    let u = OverlapMagnitude::new(coupling)?;
    let estimates = vec![
        EstimateDoc::from(rotor_steps_by_distance(u, args.p)?),
        EstimateDoc::from(rotor_steps_by_angle(u, args.p)?),
    ];
    let doc = TraceDocument::new(
        "vsearch",
        &spec,
        args.prep.as_str(),
        args.seed,
        Some(alpha),
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
