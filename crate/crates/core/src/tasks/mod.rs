//! Deterministic generators for the synthetic benchmarks.

pub mod circles_lines;
pub mod density_shift;
pub mod ode;
pub mod rna;

pub use circles_lines::{gen_circles_lines, CirclesLinesConfig};
pub use density_shift::gen_density_shift;
pub use ode::{integrate_ode, CircleField, KineticsField, LineField, OdeField};
pub use rna::{gen_rna_kinetics, RnaClasses, RnaConfig};

use crate::laplacian::{IntrinsicDim, LaplacianParams};

/// Intrinsic dimension recorded for trajectory clouds (circles, lines, kinetics).
pub const TRAJECTORY_DIM: usize = 1;

/// Laplacian parameters used for trajectory benchmarks.
pub fn trajectory_params() -> LaplacianParams {
    LaplacianParams { dim: IntrinsicDim::Known(TRAJECTORY_DIM), ..Default::default() }
}
