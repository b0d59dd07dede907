use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use npf_core::data::cache::Precision;
use npf_core::laplacian::{BandwidthPolicy, Graph, IntrinsicDim, KernelShape, LaplacianParams};
use npf_core::{MeasureMode, ReadoutKind};

#[derive(Debug, Parser)]
#[command(name = "npf", version, about = "Neural point-forms: Gram fields and learned comparison features for point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (manifest plus one CSV per cloud).
    Gen(GenArgs),
    /// Build one Gram cache per cloud.
    Precompute(PrecomputeArgs),
    /// Train a classifier on cached Gram fields.
    Train(TrainArgs),
    /// Score a saved checkpoint on the held-out split.
    Eval(EvalArgs),
    /// Gram field error against the closed-form oracle over sample sizes.
    Consistency(ConsistencyArgs),
    /// Density-corrected versus uncorrected global inner products on von Mises circles.
    DensityCheck(DensityCheckArgs),
    /// Dense Gram tensor footprint.
    Mem(MemArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    CirclesLines,
    Rna,
    DensityShift,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::CirclesLines => "circles-lines",
            Task::Rna => "rna",
            Task::DensityShift => "density-shift",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub task: Task,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with generator settings; missing keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// rna: both classes share the base rates.
    #[arg(long)]
    pub control: bool,
    /// density-shift: concentrations, one class each.
    #[arg(long, value_delimiter = ',', default_value = "0,2,4,8")]
    pub kappas: Vec<f64>,
    /// density-shift: points per cloud.
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// density-shift: clouds per concentration.
    #[arg(long, default_value_t = 10)]
    pub clouds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Fp32,
    Fp64,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Fp32 => Precision::Fp32,
            PrecisionArg::Fp64 => Precision::Fp64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    ExpQuarter,
    ExpHalf,
}

/// Flags shared by everything that builds a Laplacian.
#[derive(Debug, Clone, Args)]
pub struct LaplacianArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Pilot-density neighbours; default max(8, ceil(sqrt(m))).
    #[arg(long)]
    pub k0: Option<usize>,
    /// Neighbours per point in the kernel graph.
    #[arg(long, default_value_t = 64, conflicts_with = "full_graph")]
    pub knn: usize,
    /// Use the fully connected kernel graph.
    #[arg(long)]
    pub full_graph: bool,
    #[arg(long, value_enum, default_value_t = KernelArg::ExpQuarter)]
    pub kernel: KernelArg,
    /// Fixed bandwidth (rho = 1) instead of the density-adaptive one.
    #[arg(long)]
    pub fixed_bandwidth: bool,
}

impl LaplacianArgs {
    pub fn params(&self, dim: IntrinsicDim) -> LaplacianParams {
        LaplacianParams {
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            k0: self.k0,
            graph: if self.full_graph { Graph::Full } else { Graph::Knn(self.knn) },
            kernel: match self.kernel {
                KernelArg::ExpQuarter => KernelShape::ExpQuarter,
                KernelArg::ExpHalf => KernelShape::ExpHalf,
            },
            dim,
            bandwidth: if self.fixed_bandwidth { BandwidthPolicy::Fixed } else { BandwidthPolicy::Variable },
        }
    }
}

#[derive(Debug, Args)]
pub struct PrecomputeArgs {
    /// Dataset directory (containing manifest.toml) or manifest path.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Cache directory; default `<dataset>/gram`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Form degree.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Intrinsic dimension: a number, `auto` (local PCA) or `meta` (from the manifest, else auto).
    #[arg(long, default_value = "meta")]
    pub dim: String,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Fp32)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub laplacian: LaplacianArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Uniform,
    DensityCorrected,
}

impl From<MeasureArg> for MeasureMode {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Uniform => MeasureMode::Uniform,
            MeasureArg::DensityCorrected => MeasureMode::DensityCorrected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReadoutArg {
    Tri,
    Flat,
    Diag,
    Pool,
}

impl From<ReadoutArg> for ReadoutKind {
    fn from(r: ReadoutArg) -> Self {
        match r {
            ReadoutArg::Tri => ReadoutKind::Tri,
            ReadoutArg::Flat => ReadoutKind::Flat,
            ReadoutArg::Diag => ReadoutKind::Diag,
            ReadoutArg::Pool => ReadoutKind::Pool,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset directory (containing manifest.toml) or manifest path.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Cache directory; default `<dataset>/gram`.
    #[arg(long)]
    pub caches: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// TOML training config; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Number of learned forms.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutArg>,
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    /// circle, line, sphere, torus or von-mises:<kappa>.
    #[arg(long, default_value = "circle")]
    pub manifold: String,
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Form degree.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Couple the bandwidth to n as epsilon = n^(-theta) instead of a fixed --epsilon.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Build the k-nearest-neighbour graph instead of the full graph.
    #[arg(long)]
    pub knn: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityCheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,2,4,8")]
    pub kappas: Vec<f64>,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Weight by the kernel density estimate instead of the true density.
    #[arg(long)]
    pub estimated_density: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MemArgs {
    /// Points per cloud.
    #[arg(long)]
    pub m: u64,
    /// Ambient dimension.
    #[arg(long = "dim")]
    pub dim: usize,
    /// Form degree.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Multiply by a number of clouds.
    #[arg(long)]
    pub clouds: Option<u64>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Fp32)]
    pub precision: PrecisionArg,
}
