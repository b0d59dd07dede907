use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the point-form pipeline.
#[derive(Debug, Error)]
pub enum NpfError {
    #[error("invalid form degree k={k} for ambient dimension D={dim}")]
    InvalidDegree { k: usize, dim: usize },

    #[error("degenerate density: {0}")]
    DegenerateDensity(String),

    #[error("gram cache format error: {0}")]
    CacheFormat(String),

    #[error("ingestion error in {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("need more than {k} points for a {k}-nearest-neighbour graph, got {m}")]
    InsufficientPoints { k: usize, m: usize },

    #[error("dimension estimate failed: {0}")]
    DimensionEstimate(String),

    #[error("point {0} is isolated in the kernel graph (zero row sum)")]
    IsolatedPoint(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("chart parameter outside domain: {0}")]
    OutsideDomain(String),

    #[error("quadrature did not reach the requested precision: {0}")]
    OraclePrecision(String),

    #[error("non-finite loss on cloud {cloud}")]
    NumericFailure { cloud: String },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("ODE integration blew up at step {step}")]
    IntegrationBlowup { step: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing gram cache for cloud {cloud} at {path}; run `npf precompute` first")]
    MissingCache { cloud: String, path: PathBuf },

    #[error("cloud {id}: {source}")]
    Cloud { id: String, source: Box<NpfError> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = NpfError> = std::result::Result<T, E>;
