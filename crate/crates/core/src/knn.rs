//! Dense pairwise distances and deterministic k-nearest-neighbour graphs.

use ndarray::{Array2, ArrayView2};

use crate::error::{NpfError, Result};

/// Neighbour lists with self excluded; per row, distances are nondecreasing and
/// ties go to the smaller point index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub k: usize,
    pub indices: Array2<usize>,
    pub sq_dists: Array2<f64>,
}

/// Default graph truncation, `min(64, m-1)`.
pub fn default_knn(m: usize) -> usize {
    64.min(m.saturating_sub(1))
}

pub fn pairwise_sq_dist(points: ArrayView2<'_, f64>) -> Array2<f64> {
    let m = points.nrows();
    let mut out = Array2::zeros((m, m));
    for i in 0..m {
        let pi = points.row(i);
        for j in i + 1..m {
            let d: f64 = pi.iter().zip(points.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            out[[i, j]] = d;
            out[[j, i]] = d;
        }
    }
    out
}

/// k nearest neighbours from a precomputed squared-distance matrix.
pub fn knn_from_sq_dists(sq: ArrayView2<'_, f64>, k: usize) -> Result<NeighborGraph> {
    let m = sq.nrows();
    if k == 0 || k >= m {
        return Err(NpfError::InsufficientPoints { k, m });
    }
    let mut indices = Array2::zeros((m, k));
    let mut sq_dists = Array2::zeros((m, k));
    let mut order: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        order.clear();
        order.extend((0..m).filter(|&j| j != i));
        let row = sq.row(i);
        let cmp = |a: &usize, b: &usize| row[*a].total_cmp(&row[*b]).then(a.cmp(b));
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        for (slot, &j) in order.iter().enumerate() {
            indices[[i, slot]] = j;
            sq_dists[[i, slot]] = row[j];
        }
    }
    Ok(NeighborGraph { k, indices, sq_dists })
}

pub fn knn(points: ArrayView2<'_, f64>, k: usize) -> Result<NeighborGraph> {
    let m = points.nrows();
    if k == 0 || k >= m {
        return Err(NpfError::InsufficientPoints { k, m });
    }
    knn_from_sq_dists(pairwise_sq_dist(points).view(), k)
}
