use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "percmap", version, about = "Crossing probabilities for percolation on random planar triangulations")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = crate::WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact tables of p_k, Z_m or tail masses (CSV).
    Tables(TablesArgs),
    /// Two-segment crossing by peeling, against the exact value.
    Crossing2(Crossing2Args),
    /// Three-segment crossing by peeling.
    Crossing3(Crossing3Args),
    /// Two-segment crossing under mixed growth.
    Mixed(MixedArgs),
    /// Monte Carlo checks of the stable-process identities.
    AspVerify(AspVerifyArgs),
    /// Crossing in a free four-segment polygon.
    Boltzmann(BoltzmannArgs),
    /// Convergence of discrete crossing probabilities to their limit.
    Scaling(ScalingArgs),
    /// Law of the uncolored vertex reached by the interface (CSV).
    WDist(WDistArgs),
    /// Exact one-step probabilities against their asymptotic rates.
    RatesCheck(RatesCheckArgs),
    /// The full acceptance suite as a pass/fail matrix.
    VerifyAll(VerifyAllArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tables(_) => "tables",
            Command::Crossing2(_) => "crossing2",
            Command::Crossing3(_) => "crossing3",
            Command::Mixed(_) => "mixed",
            Command::AspVerify(_) => "asp-verify",
            Command::Boltzmann(_) => "boltzmann",
            Command::Scaling(_) => "scaling",
            Command::WDist(_) => "w-dist",
            Command::RatesCheck(_) => "rates-check",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Table {
    Pk,
    Z,
    Tail,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("table").args(["pk", "z", "tail"]))]
pub struct TablesArgs {
    /// Half-plane peel probabilities p_k.
    #[arg(long)]
    pub pk: bool,
    /// Partition functions Z_m.
    #[arg(long)]
    pub z: bool,
    /// Tail masses sum_{j > k} p_j.
    #[arg(long)]
    pub tail: bool,
    #[arg(long, default_value_t = 20)]
    pub max_k: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Primary,
    Dual,
}

#[derive(Debug, Args, Serialize)]
pub struct Crossing2Args {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = Mode::Primary)]
    pub mode: Mode,
    /// Height above which the exact landing law finishes the run; 0 simulates
    /// every event.
    #[arg(long, default_value_t = 64)]
    pub completion_height: u64,
    /// Also write the trajectory of one run (the first of task 0) as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Left,
    Right,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct Crossing3Args {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long)]
    pub c: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = Variant::Both)]
    pub variant: Variant,
}

#[derive(Debug, Args, Serialize)]
pub struct MixedArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    /// Rate of growth at the right end-point relative to the left.
    #[arg(long, default_value_t = 1.0)]
    pub rate_ratio: f64,
    #[arg(long, default_value_t = 20_000)]
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    Symmetry,
    Ratio,
    Race,
    Mixed,
    ThreeSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exact landing for overshoot-only identities, walk embedding otherwise.
    Auto,
    Walk,
    ExactLanding,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Equal,
    TimeAndGap,
}

#[derive(Debug, Args, Serialize)]
pub struct AspVerifyArgs {
    #[arg(long, value_enum)]
    pub identity: Identity,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Third length for `three-segment`.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Thresholds for the ratio law.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 8.0])]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// Lattice scale; defaults to 10^4 for exact landing and 64 otherwise.
    #[arg(long)]
    pub lambda: Option<u64>,
    /// Euler step factor.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = Preset::Equal)]
    pub preset: Preset,
    #[arg(long, default_value_t = 0.015)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Direct,
    Reweighted,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct BoltzmannArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long)]
    pub c: u64,
    #[arg(long)]
    pub d: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = Estimator::Both)]
    pub estimator: Estimator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingKind {
    /// Q_{lambda a, lambda b} against the arccos law.
    Walk,
    /// Reweighted free-polygon crossing against its continuum expression.
    Boltzmann,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long, value_enum, default_value_t = ScalingKind::Walk)]
    pub kind: ScalingKind,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 30, 100, 300])]
    pub lambdas: Vec<u64>,
    /// Sample count; for `walk` the discrete values are exact unless given.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct WDistArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long)]
    pub c: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct RatesCheckArgs {
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Jump sizes in (0, x).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
    pub k: Vec<f64>,
    /// Termination points in (0, c).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
    pub z: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 1_000, 10_000])]
    pub lambdas: Vec<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyAllArgs {
    /// Ten times fewer samples.
    #[arg(long, conflicts_with = "smoke")]
    pub quick: bool,
    /// A hundred times fewer samples (reproducibility checks only).
    #[arg(long)]
    pub smoke: bool,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
}
