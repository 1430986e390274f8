//! Shared rendering: full-precision floats, CSV/JSON trace documents, and
//! the output sink.

use std::io::Write;

use serde::{Deserialize, Serialize};

use qsearch_core::geometry::{StepEstimate, StepFormula};
use qsearch_core::speedlimit::BoundValue;
use qsearch_core::{CoreError, IterationTrace, SearchSpec};

use crate::exitcode::CliError;

/// Full-precision scientific notation: 17 significant digits round-trips
/// every f64 exactly.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `content` to the path, with `-` meaning stdout.
pub fn write_output(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(content.as_bytes())?;
        lock.flush()?;
    } else {
        std::fs::write(path, content)?;
    }
    Ok(())
}

/// A closed-form step estimate in serializable form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateDoc {
    pub formula: StepFormula,
    pub steps: BoundValue,
}

impl From<StepEstimate> for EstimateDoc {
    fn from(e: StepEstimate) -> Self {
        Self {
            formula: e.formula,
            steps: if e.divergent {
                BoundValue::Divergent
            } else {
                BoundValue::Finite(e.steps)
            },
        }
    }
}

/// One recorded step, flattened for serialization. Wall-clock timing is
/// deliberately excluded so identical runs emit identical bytes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordDoc {
    pub step: usize,
    pub overlap_re: f64,
    pub overlap_im: f64,
    pub success_prob: f64,
    pub fs_from_initial: f64,
    pub bargmann_from_initial: f64,
}

/// The JSON document for one instrumented run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub kind: String,
    pub algorithm: String,
    pub n_qubits: u32,
    pub dim: usize,
    pub target_index: usize,
    pub prep: String,
    pub seed: Option<u64>,
    pub rotor_exponent: Option<f64>,
    /// Rotation angle per application; only the rotation search has one.
    pub alpha: Option<f64>,
    /// Coupling magnitude u = |<psi_f'|psi_i>|.
    pub coupling: f64,
    pub threshold: f64,
    pub reached: bool,
    pub first_passage: Option<usize>,
    pub estimates: Vec<EstimateDoc>,
    pub records: Vec<RecordDoc>,
}

impl TraceDocument {
    pub fn new(
        algorithm: &str,
        spec: &SearchSpec,
        prep: &str,
        seed: Option<u64>,
        alpha: Option<f64>,
        trace: &IterationTrace,
        estimates: Vec<EstimateDoc>,
    ) -> Result<Self, CoreError> {
        let rotor_exponent = (algorithm == "vsearch").then(|| spec.rotor_exponent());
        let coupling = spec.coupling()?.norm();
        Ok(Self {
            kind: "iteration-trace".into(),
            algorithm: algorithm.into(),
            n_qubits: spec.n_qubits(),
            dim: spec.dim(),
            target_index: spec.target_index(),
            prep: prep.into(),
            seed,
            rotor_exponent,
            alpha,
            coupling,
            threshold: trace.stop_threshold(),
            reached: trace.reached(),
            first_passage: trace.first_passage(trace.stop_threshold()),
            estimates,
            records: trace
                .records()
                .iter()
                .map(|r| RecordDoc {
                    step: r.step,
                    overlap_re: r.overlap.re,
                    overlap_im: r.overlap.im,
                    success_prob: r.success_prob,
                    fs_from_initial: r.fs_from_initial,
                    bargmann_from_initial: r.bargmann_from_initial,
                })
                .collect(),
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// CSV with one row per step and `# key = value` footer lines carrying
    /// the run configuration and outcome.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "step,overlap_re,overlap_im,success_prob,fs_from_initial,bargmann_from_initial\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.step,
                sig17(r.overlap_re),
                sig17(r.overlap_im),
                sig17(r.success_prob),
                sig17(r.fs_from_initial),
                sig17(r.bargmann_from_initial),
            ));
        }
        out.push_str(&format!("# algorithm = {}\n", self.algorithm));
        out.push_str(&format!("# n = {}\n", self.n_qubits));
        out.push_str(&format!("# dim = {}\n", self.dim));
        out.push_str(&format!("# target = {}\n", self.target_index));
        out.push_str(&format!("# prep = {}\n", self.prep));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed = {seed}\n"));
        }
        if let Some(p) = self.rotor_exponent {
            out.push_str(&format!("# rotor_exponent = {}\n", sig17(p)));
        }
        if let Some(alpha) = self.alpha {
            out.push_str(&format!("# alpha = {}\n", sig17(alpha)));
        }
        out.push_str(&format!("# coupling = {}\n", sig17(self.coupling)));
        out.push_str(&format!("# threshold = {}\n", sig17(self.threshold)));
        out.push_str(&format!("# reached = {}\n", self.reached));
        match self.first_passage {
            Some(s) => out.push_str(&format!("# first_passage = {s}\n")),
            None => out.push_str("# first_passage = none\n"),
        }
        for e in &self.estimates {
            let value = match e.steps {
                BoundValue::Finite(v) => sig17(v),
                BoundValue::Divergent => "divergent".to_string(),
            };
            let name = match e.formula {
                StepFormula::GroverDistanceRatio => "estimate_distance_ratio",
                StepFormula::RotorDistanceRatio => "estimate_rotor_distance_ratio",
                StepFormula::RotorAngleRatio => "estimate_rotor_angle_ratio",
            };
            out.push_str(&format!("# {name} = {value}\n"));
        }
        out
    }
}
