//! The learnable layer: neural k-forms, comparison matrices, readouts and training.

pub mod checkpoint;
pub mod comparison;
pub mod model;
pub mod network;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader};
pub use comparison::{comparison_matrix, readout, ComparisonMatrix, ReadoutKind};
pub use model::{loss_and_grad, Classifier, Example, FormModel, ModelSpec};
pub use network::{Activation, FormNetwork};
pub use train::{auroc, history_csv, scores, stratified_split, train, Adam, EpochRecord, Splits, TrainConfig, TrainOutcome};
