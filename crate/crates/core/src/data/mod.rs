//! Core value types and on-disk formats.

pub mod cache;
pub mod dataset;
pub mod measure;
pub mod multi_index;

use ndarray::Array2;

use crate::error::{NpfError, Result};

/// A labelled point cloud: `m` points in ambient dimension `D`, one per row.
///
/// Row order carries no meaning downstream; every feature built from a cloud is
/// invariant (or equivariant) under row permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub id: String,
    pub points: Array2<f64>,
    pub label: Option<i64>,
    pub split: Option<String>,
    /// True sampling density at each point, when the generator knows it.
    pub density: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(id: impl Into<String>, points: Array2<f64>) -> Result<Self> {
        let id = id.into();
        let (m, dim) = points.dim();
        if m < 2 {
            return Err(NpfError::InvalidParams(format!("cloud {id}: need at least 2 points, got {m}")));
        }
        if dim < 1 {
            return Err(NpfError::InvalidParams(format!("cloud {id}: ambient dimension is zero")));
        }
        if let Some(bad) = points.iter().position(|v| !v.is_finite()) {
            return Err(NpfError::InvalidParams(format!(
                "cloud {id}: non-finite coordinate at flat index {bad}"
            )));
        }
        Ok(Self { id, points, label: None, split: None, density: None })
    }

    pub fn with_label(mut self, label: i64) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_split(mut self, split: impl Into<String>) -> Self {
        self.split = Some(split.into());
        self
    }

    pub fn with_density(mut self, density: Vec<f64>) -> Result<Self> {
        if density.len() != self.len() {
            return Err(NpfError::LengthMismatch { expected: self.len(), got: density.len() });
        }
        self.density = Some(density);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }
}
