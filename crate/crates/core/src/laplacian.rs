//! Variable-bandwidth diffusion Laplacian.
//!
//! Construction, for a cloud of `m` points with squared distances `d²(i,j)`:
//!
//! 1. pilot scale `ρ0(i)`: root mean of the `k0-1` nearest squared distances;
//! 2. pilot density `q0(i) = (2π)^{-d/2} / (m ρ0(i)^d) Σ_l exp(-d²(i,l) / (2 ρ0(i) ρ0(l)))`;
//! 3. bandwidth `ρ(i) = (m q0(i))^β`;
//! 4. kernel `K(i,j) = h(d²(i,j) / (ε ρ(i) ρ(j)))`, zero outside the neighbour graph;
//! 5. `q_ε(i) = Σ_j K(i,j) / ρ(i)^d`, `K_α(i,j) = K(i,j) / (q_ε(i)^α q_ε(j)^α)`;
//! 6. Markov kernel `K̂ = K_α / rowsum(K_α)`;
//! 7. `L(i,j) = (δ_ij - K̂(i,j)) / (ε ρ(i)²)`.
//!
//! `L` is positive semi-definite in spirit (it approximates `-∇²`), so the carré du
//! champ `½(f Lh + h Lf - L(fh))` is a nonnegative pairing of gradients. The
//! bandwidth uses the count density `m q0` (expected samples per unit volume),
//! which makes `ε` a dimensionless multiplier of the local sample spacing.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{NpfError, Result};
use crate::knn::{knn_from_sq_dists, pairwise_sq_dist, NeighborGraph};

/// Kernel shape `h` applied to the scaled squared distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelShape {
    /// `h(u) = exp(-u/4)`
    #[default]
    ExpQuarter,
    /// `h(u) = exp(-u/2)`
    ExpHalf,
}

impl KernelShape {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelShape::ExpQuarter => (-0.25 * u).exp(),
            KernelShape::ExpHalf => (-0.5 * u).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Graph {
    /// Union of k-nearest-neighbour sets (clamped to `m-1`).
    Knn(usize),
    Full,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::Knn(64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntrinsicDim {
    Known(usize),
    #[default]
    Estimate,
}

/// Whether the kernel bandwidth follows the estimated density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthPolicy {
    #[default]
    Variable,
    /// `ρ ≡ 1`: the classical fixed-bandwidth diffusion-maps kernel.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Pilot-density neighbour count; `None` picks `max(8, ⌈√m⌉)` capped at `m`.
    pub k0: Option<usize>,
    pub graph: Graph,
    pub kernel: KernelShape,
    pub dim: IntrinsicDim,
    pub bandwidth: BandwidthPolicy,
}

impl Default for LaplacianParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: -0.5,
            epsilon: 1.0,
            k0: None,
            graph: Graph::default(),
            kernel: KernelShape::default(),
            dim: IntrinsicDim::default(),
            bandwidth: BandwidthPolicy::default(),
        }
    }
}

impl LaplacianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(NpfError::InvalidParams(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.bandwidth == BandwidthPolicy::Variable && !(self.beta < 0.0) {
            return Err(NpfError::InvalidParams(format!("beta must be < 0, got {}", self.beta)));
        }
        if !self.alpha.is_finite() {
            return Err(NpfError::InvalidParams("alpha must be finite".into()));
        }
        if let Some(k0) = self.k0 {
            if k0 < 2 {
                return Err(NpfError::InvalidParams(format!("k0 must be >= 2, got {k0}")));
            }
        }
        if let IntrinsicDim::Known(0) = self.dim {
            return Err(NpfError::InvalidParams("intrinsic dimension must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolved_k0(&self, m: usize) -> usize {
        self.k0.unwrap_or_else(|| auto_k0(m))
    }
}

pub fn auto_k0(m: usize) -> usize {
    let root = (m as f64).sqrt().ceil() as usize;
    root.max(8).min(m)
}

/// Pilot density estimate and its byproducts.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub rho0: Vec<f64>,
    pub eps0: f64,
    pub rho0_tilde: Vec<f64>,
    pub q0: Vec<f64>,
    pub d_used: usize,
}

/// Compressed sparse rows, square.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// `y = A x`, fixed summation order per row.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[[i, j]] = v;
            }
        }
        out
    }
}

/// The discrete diffusion generator of a cloud.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    pub laplacian: CsrMatrix,
    /// Kernel bandwidth per point.
    pub rho: Vec<f64>,
    /// Unnormalised kernel density `q_ε`.
    pub q_eps: Vec<f64>,
    pub density: DensityEstimate,
    pub params: LaplacianParams,
}

impl DiffusionOperator {
    pub fn len(&self) -> usize {
        self.laplacian.n
    }

    pub fn is_empty(&self) -> bool {
        self.laplacian.n == 0
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        apply_laplacian(self, f)
    }
}

pub fn apply_laplacian(op: &DiffusionOperator, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != op.len() {
        return Err(NpfError::LengthMismatch { expected: op.len(), got: f.len() });
    }
    let mut out = vec![0.0; f.len()];
    op.laplacian.mul_vec_into(f, &mut out);
    Ok(out)
}

/// Intrinsic dimension by local PCA: per point, the smallest `r` whose top-`r`
/// eigenvalues hold at least 95% of the neighbourhood variance; the lower median
/// over points is returned.
pub fn estimate_dimension(points: ArrayView2<'_, f64>, k_pca: usize) -> Result<usize> {
    const VARIANCE_SHARE: f64 = 0.95;
    let (m, dim) = points.dim();
    if k_pca < 1 || k_pca >= m {
        return Err(NpfError::DimensionEstimate(format!(
            "need 1 <= k_pca < m, got k_pca={k_pca}, m={m}"
        )));
    }
    let graph = knn_from_sq_dists(pairwise_sq_dist(points).view(), k_pca)?;
    let mut per_point = Vec::with_capacity(m);
    let size = (k_pca + 1) as f64;
    for i in 0..m {
        let members: Vec<usize> = std::iter::once(i).chain(graph.indices.row(i).iter().copied()).collect();
        let mut mean = vec![0.0; dim];
        for &j in &members {
            for (c, v) in mean.iter_mut().enumerate() {
                *v += points[[j, c]] / size;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for &j in &members {
            for a in 0..dim {
                let da = points[[j, a]] - mean[a];
                for b in a..dim {
                    cov[(a, b)] += da * (points[[j, b]] - mean[b]) / size;
                }
            }
        }
        for a in 0..dim {
            for b in 0..a {
                cov[(a, b)] = cov[(b, a)];
            }
        }
        let mut eig: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = eig.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        eig.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut r = dim;
        for (idx, v) in eig.iter().enumerate() {
            acc += v;
            if acc >= VARIANCE_SHARE * total {
                r = idx + 1;
                break;
            }
        }
        per_point.push(r);
    }
    if per_point.is_empty() {
        return Err(NpfError::DimensionEstimate("every neighbourhood is a single repeated point".into()));
    }
    per_point.sort_unstable();
    Ok(per_point[(per_point.len() - 1) / 2])
}

fn density_from_graph(sq: ArrayView2<'_, f64>, graph: &NeighborGraph, d: usize) -> Result<DensityEstimate> {
    let m = sq.nrows();
    let rho0: Vec<f64> = graph
        .sq_dists
        .rows()
        .into_iter()
        .map(|row| (row.sum() / row.len() as f64).sqrt())
        .collect();
    if let Some(i) = rho0.iter().position(|&r| !(r > 0.0)) {
        return Err(NpfError::DegenerateDensity(format!(
            "point {i} coincides with all of its {} nearest neighbours",
            graph.k
        )));
    }
    let sqrt_eps0 = rho0.iter().sum::<f64>() / m as f64;
    let rho0_tilde = rho0.iter().map(|r| r / sqrt_eps0).collect();
    let norm = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let q0: Vec<f64> = (0..m)
        .map(|i| {
            let s: f64 = (0..m).map(|l| (-sq[[i, l]] / (2.0 * rho0[i] * rho0[l])).exp()).sum();
            norm * s / (rho0[i].powi(d as i32) * m as f64)
        })
        .collect();
    if let Some(i) = q0.iter().position(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(NpfError::DegenerateDensity(format!("pilot density at point {i} is {}", q0[i])));
    }
    Ok(DensityEstimate { rho0, eps0: sqrt_eps0 * sqrt_eps0, rho0_tilde, q0, d_used: d })
}

/// Pilot density from the `k0 - 1` nearest neighbours of every point.
pub fn estimate_density(points: ArrayView2<'_, f64>, k0: usize, d: usize) -> Result<DensityEstimate> {
    let m = points.nrows();
    if k0 < 2 || k0 > m {
        return Err(NpfError::InvalidParams(format!("need 2 <= k0 <= m, got k0={k0}, m={m}")));
    }
    if d < 1 {
        return Err(NpfError::InvalidParams("intrinsic dimension must be >= 1".into()));
    }
    let sq = pairwise_sq_dist(points);
    let graph = knn_from_sq_dists(sq.view(), k0 - 1)?;
    density_from_graph(sq.view(), &graph, d)
}

/// Neighbour lists (self included) for the kernel support.
fn support(sq: ArrayView2<'_, f64>, graph: Graph) -> Result<Vec<Vec<usize>>> {
    let m = sq.nrows();
    match graph {
        Graph::Full => Ok((0..m).map(|_| (0..m).collect()).collect()),
        Graph::Knn(k) => {
            let k = k.min(m - 1);
            if k == 0 {
                return Err(NpfError::InsufficientPoints { k, m });
            }
            let g = knn_from_sq_dists(sq, k)?;
            let mut rows: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
            for i in 0..m {
                for &j in g.indices.row(i) {
                    rows[i].push(j);
                    rows[j].push(i);
                }
            }
            for row in &mut rows {
                row.sort_unstable();
                row.dedup();
            }
            Ok(rows)
        }
    }
}

pub fn build_laplacian(points: ArrayView2<'_, f64>, params: &LaplacianParams) -> Result<DiffusionOperator> {
    params.validate()?;
    let m = points.nrows();
    if m < 2 {
        return Err(NpfError::InsufficientPoints { k: 1, m });
    }
    let k0 = params.resolved_k0(m);
    if k0 > m {
        return Err(NpfError::InvalidParams(format!("k0={k0} exceeds the {m} available points")));
    }
    let d = match params.dim {
        IntrinsicDim::Known(d) => d,
        IntrinsicDim::Estimate => estimate_dimension(points, 16.min(m - 1))?,
    };
    let sq = pairwise_sq_dist(points);
    let pilot = knn_from_sq_dists(sq.view(), k0 - 1)?;
    let density = density_from_graph(sq.view(), &pilot, d)?;

    let rho: Vec<f64> = match params.bandwidth {
        BandwidthPolicy::Variable => density.q0.iter().map(|q| (m as f64 * q).powf(params.beta)).collect(),
        BandwidthPolicy::Fixed => vec![1.0; m],
    };
    let rows = support(sq.view(), params.graph)?;

    let eps = params.epsilon;
    let mut kernel: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&j| params.kernel.eval(sq[[i, j]] / (eps * rho[i] * rho[j]))).collect())
        .collect();
    let q_eps: Vec<f64> = kernel
        .iter()
        .enumerate()
        .map(|(i, k)| k.iter().sum::<f64>() / rho[i].powi(d as i32))
        .collect();
    if params.alpha != 0.0 {
        let scale: Vec<f64> = q_eps.iter().map(|q| q.powf(params.alpha)).collect();
        for (i, row) in rows.iter().enumerate() {
            for (v, &j) in kernel[i].iter_mut().zip(row) {
                *v /= scale[i] * scale[j];
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(m + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    for (i, row) in rows.iter().enumerate() {
        let total: f64 = kernel[i].iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(NpfError::IsolatedPoint(i));
        }
        let c = eps * rho[i] * rho[i];
        let start = vals.len();
        let mut off_diag = 0.0;
        let mut diag_slot = None;
        for (&j, &kv) in row.iter().zip(&kernel[i]) {
            cols.push(j);
            if j == i {
                diag_slot = Some(vals.len());
                vals.push(0.0);
            } else {
                let p = kv / total;
                off_diag += p;
                vals.push(-p / c);
            }
        }
        // diagonal balances the row exactly so constants are annihilated
        vals[diag_slot.expect("support always contains the point itself")] = off_diag / c;
        debug_assert!(vals[start..].iter().all(|v| v.is_finite()));
        row_ptr.push(vals.len());
    }
    Ok(DiffusionOperator {
        laplacian: CsrMatrix { n: m, row_ptr, cols, vals },
        rho,
        q_eps,
        density,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;
    use std::f64::consts::PI;

    fn circle(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = crate::rng::stream(seed, "circle-test", 0);
        let mut pts = Array2::zeros((n, 2));
        for i in 0..n {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            pts[[i, 0]] = t.cos();
            pts[[i, 1]] = t.sin();
        }
        pts
    }

    /// Steps 1-10 written out densely, independent of the sparse path.
    fn dense_oracle(points: &Array2<f64>, p: &LaplacianParams, d: usize) -> Array2<f64> {
        let m = points.nrows();
        let k0 = p.resolved_k0(m);
        let mut sq = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                sq[[i, j]] = (0..points.ncols()).map(|c| (points[[i, c]] - points[[j, c]]).powi(2)).sum();
            }
        }
        let rho0: Vec<f64> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = (0..m).filter(|&j| j != i).map(|j| sq[[i, j]]).collect();
                row.sort_by(f64::total_cmp);
                (row[..k0 - 1].iter().sum::<f64>() / (k0 - 1) as f64).sqrt()
            })
            .collect();
        let q0: Vec<f64> = (0..m)
            .map(|i| {
                (2.0 * PI).powf(-(d as f64) / 2.0) / (rho0[i].powi(d as i32) * m as f64)
                    * (0..m).map(|l| (-sq[[i, l]] / (2.0 * rho0[i] * rho0[l])).exp()).sum::<f64>()
            })
            .collect();
        let rho: Vec<f64> = q0.iter().map(|q| (m as f64 * q).powf(p.beta)).collect();
        let k = Array2::from_shape_fn((m, m), |(i, j)| (-sq[[i, j]] / (4.0 * p.epsilon * rho[i] * rho[j])).exp());
        let qe: Vec<f64> = (0..m).map(|i| k.row(i).sum() / rho[i].powi(d as i32)).collect();
        let ka = Array2::from_shape_fn((m, m), |(i, j)| k[[i, j]] / (qe[i].powf(p.alpha) * qe[j].powf(p.alpha)));
        let qa: Vec<f64> = (0..m).map(|i| ka.row(i).sum()).collect();
        Array2::from_shape_fn((m, m), |(i, j)| {
            let khat = ka[[i, j]] / qa[i];
            let delta = if i == j { 1.0 } else { 0.0 };
            (delta - khat) / (p.epsilon * rho[i] * rho[i])
        })
    }

    #[test]
    fn two_point_density() {
        let est = estimate_density(array![[0.0], [1.0]].view(), 2, 1).unwrap();
        assert_eq!(est.rho0, vec![1.0, 1.0]);
        assert_eq!(est.eps0, 1.0);
        let expected = (2.0 * PI).powf(-0.5) * 0.5 * (1.0 + (-0.5f64).exp());
        for q in &est.q0 {
            assert!((q - expected).abs() < 1e-15);
        }
        assert!((expected - 0.3204).abs() < 1e-4);
    }

    #[test]
    fn density_scale_equivariance() {
        let pts = circle(60, 3);
        let a = estimate_density(pts.view(), 8, 1).unwrap();
        let b = estimate_density((&pts * 3.0).view(), 8, 1).unwrap();
        for i in 0..60 {
            assert!((b.rho0[i] - 3.0 * a.rho0[i]).abs() < 1e-12);
            assert!((b.rho0_tilde[i] - a.rho0_tilde[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_circle_density() {
        let pts = circle(2000, 11);
        let est = estimate_density(pts.view(), auto_k0(2000), 1).unwrap();
        let mut q = est.q0.clone();
        q.sort_by(f64::total_cmp);
        let median = q[q.len() / 2];
        let truth = 1.0 / (2.0 * PI);
        assert!((median - truth).abs() <= 0.15 * truth, "median q0 {median}");
    }

    #[test]
    fn duplicate_points_are_degenerate() {
        let pts = array![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]];
        assert!(matches!(estimate_density(pts.view(), 2, 1), Err(NpfError::DegenerateDensity(_))));
    }

    #[test]
    fn dimension_of_circle_and_sphere() {
        let mut pts = Array2::zeros((500, 2));
        for i in 0..500 {
            let t = 2.0 * PI * i as f64 / 500.0;
            pts[[i, 0]] = t.cos();
            pts[[i, 1]] = t.sin();
        }
        assert_eq!(estimate_dimension(pts.view(), 10).unwrap(), 1);

        let sphere = crate::oracle::Manifold::Sphere.sample(1000, 5).points;
        assert_eq!(estimate_dimension(sphere.view(), 16).unwrap(), 2);

        let same = Array2::from_elem((20, 3), 1.5);
        assert!(matches!(estimate_dimension(same.view(), 5), Err(NpfError::DimensionEstimate(_))));
    }

    #[test]
    fn annihilates_constants_and_rows_are_stochastic() {
        for graph in [Graph::Full, Graph::Knn(10)] {
            for alpha in [0.0, 0.5, 1.0] {
                let params = LaplacianParams { alpha, graph, dim: IntrinsicDim::Known(1), ..Default::default() };
                let op = build_laplacian(circle(80, 1).view(), &params).unwrap();
                let ones = vec![1.0; 80];
                let l1 = op.apply(&ones).unwrap();
                assert!(l1.iter().all(|v| v.abs() <= 1e-12), "max {:?}", l1.iter().fold(0.0f64, |a, b| a.max(b.abs())));
                // K̂ = I - ε ρ² L is row-stochastic with nonnegative entries
                for i in 0..80 {
                    let c = params.epsilon * op.rho[i] * op.rho[i];
                    let mut sum = 0.0;
                    for (j, v) in op.laplacian.row(i) {
                        let khat = if i == j { 1.0 } else { 0.0 } - c * v;
                        assert!(khat >= -1e-15);
                        sum += khat;
                    }
                    assert!((sum - 1.0).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn three_collinear_points_match_dense_oracle() {
        let pts = array![[0.0], [1.0], [2.0]];
        let params = LaplacianParams { k0: Some(2), graph: Graph::Full, dim: IntrinsicDim::Known(1), ..Default::default() };
        let op = build_laplacian(pts.view(), &params).unwrap();
        let oracle = dense_oracle(&pts, &params, 1);
        let l = op.laplacian.to_dense();
        for (a, b) in l.iter().zip(oracle.iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn random_cloud_matches_dense_oracle() {
        let mut rng = crate::rng::stream(9, "lap", 0);
        let pts = Array2::from_shape_fn((25, 3), |_| rng.random_range(-1.0..1.0));
        let params =
            LaplacianParams { alpha: 0.5, k0: Some(6), graph: Graph::Full, dim: IntrinsicDim::Known(2), ..Default::default() };
        let op = build_laplacian(pts.view(), &params).unwrap();
        let oracle = dense_oracle(&pts, &params, 2);
        let l = op.laplacian.to_dense();
        let f: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lf = op.apply(&f).unwrap();
        for i in 0..25 {
            let dense: f64 = (0..25).map(|j| oracle[[i, j]] * f[j]).sum();
            assert!((lf[i] - dense).abs() <= 1e-10 * (1.0 + dense.abs()));
            for j in 0..25 {
                assert!((l[[i, j]] - oracle[[i, j]]).abs() <= 1e-12 * (1.0 + oracle[[i, j]].abs()));
            }
        }
    }

    #[test]
    fn fixed_bandwidth_is_classical_kernel() {
        let pts = array![[0.0, 0.0], [0.5, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let params = LaplacianParams {
            beta: 0.0,
            bandwidth: BandwidthPolicy::Fixed,
            graph: Graph::Full,
            k0: Some(2),
            dim: IntrinsicDim::Known(1),
            ..Default::default()
        };
        let op = build_laplacian(pts.view(), &params).unwrap();
        assert!(op.rho.iter().all(|&r| r == 1.0));
        let sq = pairwise_sq_dist(pts.view());
        for i in 0..4 {
            let z: f64 = (0..4).map(|j| (-sq[[i, j]] / 4.0).exp()).sum();
            assert!((op.q_eps[i] - z).abs() < 1e-15);
            for (j, v) in op.laplacian.row(i) {
                if j != i {
                    assert!((v + (-sq[[i, j]] / 4.0).exp() / z).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn indicator_picks_a_column() {
        let pts = circle(30, 2);
        let op = build_laplacian(pts.view(), &LaplacianParams { dim: IntrinsicDim::Known(1), ..Default::default() }).unwrap();
        let dense = op.laplacian.to_dense();
        let mut e = vec![0.0; 30];
        e[7] = 2.0;
        let out = op.apply(&e).unwrap();
        for i in 0..30 {
            assert_eq!(out[i], 2.0 * dense[[i, 7]]);
        }
        assert!(matches!(op.apply(&[1.0]), Err(NpfError::LengthMismatch { .. })));
    }

    #[test]
    fn permutation_conjugates() {
        use rand::seq::SliceRandom;
        let pts = circle(40, 4);
        let mut perm: Vec<usize> = (0..40).collect();
        perm.shuffle(&mut crate::rng::stream(4, "perm", 0));
        let permuted = Array2::from_shape_fn((40, 2), |(i, c)| pts[[perm[i], c]]);
        let params = LaplacianParams { graph: Graph::Knn(12), dim: IntrinsicDim::Known(1), ..Default::default() };
        let a = build_laplacian(pts.view(), &params).unwrap().laplacian.to_dense();
        let b = build_laplacian(permuted.view(), &params).unwrap().laplacian.to_dense();
        for i in 0..40 {
            for j in 0..40 {
                let x = a[[perm[i], perm[j]]];
                assert!((b[[i, j]] - x).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn invalid_params() {
        let pts = circle(10, 0);
        for p in [
            LaplacianParams { epsilon: 0.0, ..Default::default() },
            LaplacianParams { beta: 0.1, ..Default::default() },
            LaplacianParams { k0: Some(1), ..Default::default() },
            LaplacianParams { k0: Some(11), ..Default::default() },
        ] {
            assert!(build_laplacian(pts.view(), &p).is_err());
        }
    }
}
