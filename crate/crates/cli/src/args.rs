use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "wfr",
    version,
    about = "Weighted Fourier restriction experiments"
)]
pub struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving the CSV, JSON and SVG artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// What goes to standard output.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact exponent table.
    Exponents(ExponentsArgs),
    /// Frostman certificates for sampled weights.
    Weights {
        #[command(subcommand)]
        action: WeightsAction,
    },
    /// Spherical-average decay of a fractal measure.
    Decay(DecayArgs),
    /// Growth of the weighted extension norm in R.
    ExtendScaling(ScalingArgs),
    /// Wave packet decomposition, tangency and broad norms.
    Wavepackets(WavepacketArgs),
    /// SVG plot of a CSV artifact.
    Plot(PlotArgs),
}

#[derive(Debug, Subcommand)]
pub enum WeightsAction {
    Verify(WeightsArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExponentsArgs {
    #[arg(long)]
    pub d: i64,
    /// A single α, rational or decimal.
    #[arg(long, conflicts_with = "table")]
    pub alpha: Option<String>,
    /// `start:end:step`; the start is included when it is a valid α.
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long)]
    pub compare_prior: bool,
    /// Check the closed forms of γ_m against the dimension recursion.
    #[arg(long)]
    pub check_recursion: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeightsArgs {
    #[arg(long)]
    pub d: Option<usize>,
    /// `uniform`, `plane-cantor`, `cantor:b,rho`, or `from-measure:<measure>`
    /// with a measure recipe such as `cantor:2,1/4,4` or `point`.
    #[arg(long, conflicts_with = "grid_file")]
    pub recipe: Option<String>,
    /// Binary weight grid.
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    /// Dimension to certify; defaults to the recipe's.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Constant C in `∫_B H <= C r^α`.
    #[arg(long, default_value_t = 4.0)]
    pub constant: f64,
    /// Scale R of the recipe weight.
    #[arg(long = "R", default_value_t = 16.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.125)]
    pub spacing: f64,
    /// Comma-separated ball radii.
    #[arg(long, default_value = "1,2,4,8,16")]
    pub radii: String,
    /// Spacing of the lattice of ball centers.
    #[arg(long, default_value_t = 1.0)]
    pub center_step: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecayArgs {
    #[arg(long)]
    pub d: usize,
    /// `cantor:b,rho,n` or `point`.
    #[arg(long)]
    pub recipe: String,
    #[arg(long)]
    pub alpha_claimed: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 64.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Fixed sphere rule size; picked per R when absent.
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    /// Allowed shortfall of the fitted exponent; 0.15 for d = 2, 0.2 for d = 3.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Also write a log-log SVG next to the CSV.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub alpha: String,
    /// `uniform`, `plane-cantor` or `cantor:b,rho`.
    #[arg(long, default_value = "uniform")]
    pub weight: String,
    /// `one`, `bump:c..,a`, `gauss:c..,w`, `cap:c..,a`, `random:seed` or `random`.
    #[arg(long, default_value = "one")]
    pub f: String,
    /// Comma-separated radii.
    #[arg(long = "R")]
    pub radii: String,
    #[arg(long, default_value_t = 0.5)]
    pub spacing: f64,
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WavepacketArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value = "one")]
    pub f: String,
    /// Polynomials over Q in x1..xd, separated by `;`.
    #[arg(long)]
    pub variety: String,
    /// Tangency constant E.
    #[arg(long = "E", default_value_t = 1.0)]
    pub e: f64,
    #[arg(long, default_value_t = 0.25)]
    pub cap_transition: f64,
    #[arg(long, default_value_t = 0.25)]
    pub spatial_transition: f64,
    /// Core-line samples per tangency test.
    #[arg(long, default_value_t = 33)]
    pub line_samples: usize,
    /// Tiles lighter than this fraction of ‖f‖ are left out of the table.
    #[arg(long, default_value_t = 0.0)]
    pub min_mass: f64,
    /// Cap scale K of the broad norm; no broad norm without it.
    #[arg(long = "broad-K")]
    pub broad_k: Option<usize>,
    /// Comma-separated values of A.
    #[arg(long = "broad-A", default_value = "1")]
    pub broad_a: String,
    /// Exponent of the broad norm; 2d/(d-1) by default.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value = "uniform")]
    pub weight: String,
    #[arg(long, default_value_t = 0.5)]
    pub spacing: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlotArgs {
    /// CSV written by `decay`, `extend-scaling` or `exponents`.
    pub csv: PathBuf,
    /// Target file; defaults to the CSV name with an `.svg` suffix.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
