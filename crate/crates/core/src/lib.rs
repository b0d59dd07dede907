//! Neural point-forms.
//!
//! Learnable geometric features for point clouds built from a variable-bandwidth
//! diffusion Laplacian. The pipeline is:
//!
//! 1. [`laplacian::build_laplacian`] turns a cloud into a discrete diffusion generator.
//! 2. [`gram::gram_field_1`] estimates the order-1 Gram field with the discrete
//!    carré du champ, and [`gram::compound_gram_field`] lifts it to order k.
//! 3. [`forms::comparison_matrix`] contracts the Gram field against a neural k-form,
//!    giving an ℓ×ℓ permutation-invariant feature per cloud.
//!
//! [`oracle`] holds closed-form Gram fields for embedded manifolds, used to check
//! the estimators, and [`tasks`] generates the synthetic benchmarks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod forms;
pub mod gram;
pub mod knn;
pub mod laplacian;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod tasks;

pub use data::{
    cache::{read_gram_cache, write_gram_cache, GramCacheHeader, Precision},
    dataset::{load_dataset, write_dataset, CloudEntry, Manifest},
    measure::{measure_weights, Measure, MeasureMode},
    multi_index::{binomial, multi_index_table, MultiIndexTable},
    PointCloud,
};
pub use error::{NpfError, Result};
pub use forms::{
    auroc, comparison_matrix, readout, Classifier, ComparisonMatrix, FormNetwork, ReadoutKind,
    TrainConfig,
};
pub use gram::{GramField, MemoryEstimate};
pub use knn::NeighborGraph;
pub use pipeline::{precompute_all, run_task, Precomputed};
pub use laplacian::{DensityEstimate, DiffusionOperator, LaplacianParams};
