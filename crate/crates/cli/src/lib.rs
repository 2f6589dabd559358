//! `varifold` command-line pipeline: atomize → Gram → signature → distances
//! → scores and exports.

mod commands;
mod error;

pub use error::{CliError, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use varifold_motion::dataset::{DropTolerance, MotionClass};
use varifold_motion::kernel::{KernelConfig, KernelFamily, DEFAULT_SIGMA_O, DEFAULT_TILE_SIZE};
use varifold_motion::retrieval::DistanceMetric;

#[derive(Debug, Parser)]
#[command(name = "varifold", version, about = "Varifold Gram-Hankel signatures and motion retrieval")]
pub struct Cli {
    /// Worker threads for the kernel reductions (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the frame Gram matrix of every sequence.
    Gram(FixedArgs),
    /// Write the order-r Gram-Hankel signature of every sequence.
    Signature(SignatureArgs),
    /// Score retrieval at a fixed (σ, r).
    Retrieve(RetrieveArgs),
    /// Score retrieval over a (σ, r) grid.
    Sweep(SweepArgs),
    /// Best sweep cell for each centroid × unit-norm combination.
    Ablate(AblateArgs),
    /// Classical MDS of frames or of whole-sequence signatures.
    Mds(MdsArgs),
    /// Write a synthetic labeled dataset and its manifest.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Atom cache root.
    #[arg(long, env = "VARIFOLD_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Faces with area at or below this are dropped (default: 1e-12 · bbox diagonal²).
    #[arg(long)]
    pub drop_tolerance: Option<f64>,
}

impl DataArgs {
    pub fn drop_tolerance(&self) -> DropTolerance {
        self.drop_tolerance.map_or(DropTolerance::Auto, DropTolerance::Absolute)
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, default_value = "oriented_varifold", value_parser = parse_family)]
    pub family: KernelFamily,
    #[arg(long, default_value_t = DEFAULT_SIGMA_O)]
    pub sigma_o: f64,
    /// Skip the unit varifold norm normalization.
    #[arg(long)]
    pub no_unit_norm: bool,
    /// Skip centroid centering.
    #[arg(long)]
    pub no_centroid: bool,
    #[arg(long, default_value_t = DEFAULT_TILE_SIZE)]
    pub tile_size: usize,
    /// Ignore atom pairs farther apart than this many σ.
    #[arg(long)]
    pub cutoff: Option<f64>,
}

impl KernelArgs {
    pub fn config(&self, sigma: f64) -> KernelConfig {
        KernelConfig {
            sigma_o: self.sigma_o,
            tile_size: self.tile_size,
            cutoff: self.cutoff,
            ..KernelConfig::new(self.family, sigma).with_normalizations(!self.no_unit_norm, !self.no_centroid)
        }
    }
}

#[derive(Debug, Args)]
pub struct FixedArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub sigma: f64,
}

#[derive(Debug, Args)]
pub struct SignatureArgs {
    #[command(flatten)]
    pub fixed: FixedArgs,
    /// Signature order, 1 ≤ r < T.
    #[arg(long)]
    pub r: usize,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub fixed: FixedArgs,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value = "frobenius", value_parser = parse_metric)]
    pub metric: DistanceMetric,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated σ values (default: 10 log-spaced in [1e-3, 10]).
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Vec<f64>,
    /// Comma-separated orders (default: 1..T_min−1).
    #[arg(long, value_delimiter = ',')]
    pub orders: Vec<usize>,
    /// Comma-separated metrics.
    #[arg(long, value_delimiter = ',', default_value = "frobenius", value_parser = parse_metric)]
    pub metric: Vec<DistanceMetric>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "oriented_varifold", value_parser = parse_family)]
    pub family: KernelFamily,
    #[arg(long, default_value_t = DEFAULT_SIGMA_O)]
    pub sigma_o: f64,
    #[arg(long, default_value_t = DEFAULT_TILE_SIZE)]
    pub tile_size: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct MdsArgs {
    #[command(flatten)]
    pub fixed: FixedArgs,
    /// Embed the frames of these sequences (comma-separated ids).
    #[arg(long, value_delimiter = ',', conflicts_with = "r")]
    pub sequences: Vec<String>,
    /// Embed whole-sequence signatures of this order instead.
    #[arg(long, required_unless_present = "sequences")]
    pub r: Option<usize>,
    #[arg(long, default_value = "frobenius", value_parser = parse_metric)]
    pub metric: DistanceMetric,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "bending,pulsation,swing")]
    pub classes: Vec<MotionClass>,
    #[arg(long, default_value_t = 5)]
    pub subjects: usize,
    #[arg(long, default_value_t = 20)]
    pub frames: usize,
    #[arg(long, default_value_t = 162)]
    pub vertex_count: usize,
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generate clean recordings: no placement, drift, offsets or scale jitter.
    #[arg(long)]
    pub no_capture_nuisance: bool,
}

fn parse_family(s: &str) -> Result<KernelFamily, String> {
    s.parse::<KernelFamily>().map_err(|e| e.to_string())
}

fn parse_metric(s: &str) -> Result<DistanceMetric, String> {
    s.parse::<DistanceMetric>().map_err(|e| e.to_string())
}

/// Runs one parsed invocation; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Gram(a) => commands::gram(&a),
        Command::Signature(a) => commands::signature(&a),
        Command::Retrieve(a) => commands::retrieve(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Ablate(a) => commands::ablate(&a),
        Command::Mds(a) => commands::mds(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}
