//! Command-line surface: one subcommand per experiment.

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qsearch",
    version,
    about = "Exact amplitude-amplification search lab and speed-limit bound checker"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the composite search iteration and record its trajectory.
    Grover(GroverArgs),
    /// Run the controlled-rotation search and record its trajectory.
    Vsearch(VsearchArgs),
    /// Measure first-passage step counts across register widths.
    Sweep(SweepArgs),
    /// Integrate a Hamiltonian and check the probability envelopes.
    Bounds(BoundsArgs),
    /// Re-measure every claimed constant and law and report the comparison.
    Adjudicate(AdjudicateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrepKind {
    /// The n-fold Hadamard transform (the exhaustive-search preparation).
    WalshHadamard,
    /// A Haar-random unitary, deterministic in --seed.
    Haar,
}

impl PrepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrepKind::WalshHadamard => "walsh-hadamard",
            PrepKind::Haar => "haar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    /// Register width in qubits.
    #[arg(long)]
    pub n: u32,
    /// Marked basis index; defaults to the last one, 2^n - 1.
    #[arg(long)]
    pub target: Option<usize>,
    /// How the search frame is prepared.
    #[arg(long, value_enum, default_value_t = PrepKind::WalshHadamard)]
    pub prep: PrepKind,
    /// Seed for the haar preparation (required with --prep haar).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Success probability at which the run stops. Values above 1 never
    /// trigger, which runs the full step budget.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Step budget; defaults to ceil((pi/4) sqrt(N)) + 8.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path, or - for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct VsearchArgs {
    /// Register width in qubits.
    #[arg(long)]
    pub n: u32,
    /// Marked basis index; defaults to the last one, 2^n - 1.
    #[arg(long)]
    pub target: Option<usize>,
    /// Rotor exponent p in (0, 1]: the rotation angle is 2 arcsin(u^p).
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// How the search frame is prepared.
    #[arg(long, value_enum, default_value_t = PrepKind::WalshHadamard)]
    pub prep: PrepKind,
    /// Seed for the haar preparation (required with --prep haar).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Success probability at which the run stops. Values above 1 never
    /// trigger, which runs the full step budget.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Step budget; defaults to ceil(pi / alpha) + 8.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path, or - for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Smallest register width, inclusive.
    #[arg(long)]
    pub n_min: u32,
    /// Largest register width, inclusive.
    #[arg(long)]
    pub n_max: u32,
    /// Rotor exponent for the rotation-search column.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// First-passage success threshold for both algorithms.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path, or - for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    /// Constant transverse coupling on two levels.
    ConstantRabi,
    /// Transverse coupling plus a level splitting.
    DetunedRabi,
    /// Sinusoidally driven transverse coupling.
    Driven,
    /// Smooth random Hermitian family, deterministic in --seed.
    RandomSmooth,
    /// Energy times the sum of projectors onto the start and target rays.
    ProjectorPair,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Which Hamiltonian family to integrate.
    #[arg(long, value_enum)]
    pub preset: PresetArg,
    /// Coupling strength for the two-level presets.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub omega: f64,
    /// Level splitting (detuned-rabi only).
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Drive amplitude (driven only).
    #[arg(long, default_value_t = 2.0)]
    pub amp: f64,
    /// Constant bias added to the drive (driven only).
    #[arg(long, default_value_t = 0.7)]
    pub bias: f64,
    /// Drive frequency (driven only).
    #[arg(long, default_value_t = 3.0)]
    pub drive_omega: f64,
    /// Hilbert-space dimension for random-smooth; must be a power of two.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Seed for random-smooth.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Harmonic count for random-smooth.
    #[arg(long, default_value_t = 3)]
    pub terms: usize,
    /// Register width for projector-pair.
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    /// Target basis index; defaults to the last one.
    #[arg(long)]
    pub target: Option<usize>,
    /// Projector energy scale (projector-pair only).
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    /// Tilt of the two-level target off |1>: target = sin(a)|0> + cos(a)|1>.
    /// Zero keeps the antipodal target.
    #[arg(long, default_value_t = 0.0)]
    pub target_angle: f64,
    /// Evolution span; defaults to 2 (projector-pair: 5% past its arrival
    /// time).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Integration steps; defaults to 2048 (projector-pair: scaled with the
    /// span).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Rotor exponent used for the derived step bounds.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Sandwich slack: a probability must leave the band by more than this
    /// to count as a violation.
    #[arg(long, default_value_t = qsearch_core::speedlimit::DEFAULT_SANDWICH_TOL)]
    pub tol: f64,
    /// Output path, or - for stdout. The report is always JSON.
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Markdown,
    Json,
}

#[derive(Debug, Args)]
pub struct AdjudicateArgs {
    /// Seed for the randomized cross-checks.
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
    pub format: ReportFormat,
    /// Output path, or - for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}
