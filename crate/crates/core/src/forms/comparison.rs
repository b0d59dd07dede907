//! Comparison matrices `C = Σ_p μ(p) F_p G(p) F_pᵀ` and their readouts.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Array3, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::network::{BatchTrace, FormNetwork};
use crate::data::measure::Measure;
use crate::error::{NpfError, Result};
use crate::gram::GramField;

/// Symmetric `ℓ × ℓ` matrix of global inner products between learned forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix(pub Array2<f64>);

impl ComparisonMatrix {
    pub fn ell(&self) -> usize {
        self.0.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }
}

/// Per-point intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct CloudPass {
    pub trace: BatchTrace,
    /// `F_p G(p)` for every point, `m × ℓ × B`.
    pub fg: Array3<f64>,
    pub matrix: ComparisonMatrix,
}

pub(crate) fn check_inputs(gk: &GramField, net: &FormNetwork, points: ArrayView2<'_, f64>, mu: &Measure) -> Result<()> {
    let m = gk.len();
    if points.nrows() != m || mu.len() != m {
        return Err(NpfError::LengthMismatch { expected: m, got: if points.nrows() != m { points.nrows() } else { mu.len() } });
    }
    if gk.basis_len() != net.basis_len() || gk.dim() != net.input_dim() || points.ncols() != net.input_dim() {
        return Err(NpfError::ShapeMismatch(format!(
            "network maps R^{} to {} coefficients; gram field is D={}, B={}; points have {} columns",
            net.input_dim(),
            net.basis_len(),
            gk.dim(),
            gk.basis_len(),
            points.ncols()
        )));
    }
    Ok(())
}

/// `F_p` for point `p` as an `ℓ × B` view of the network output.
pub(crate) fn form_at<'a>(out: &'a ArrayView2<'a, f64>, p: usize, ell: usize, b: usize) -> ArrayView2<'a, f64> {
    out.row(p).into_shape_with_order((ell, b)).expect("output row is ℓ·B")
}

pub(crate) fn forward_cloud(gk: &GramField, net: &FormNetwork, points: ArrayView2<'_, f64>, mu: &Measure) -> Result<CloudPass> {
    check_inputs(gk, net, points, mu)?;
    let (m, ell, b) = (gk.len(), net.ell(), net.basis_len());
    let trace = net.forward_batch(points)?;
    let out = trace.output();
    let mut fg = Array3::zeros((m, ell, b));
    let mut c = Array2::<f64>::zeros((ell, ell));
    for p in 0..m {
        let f = form_at(&out, p, ell, b);
        let mut fgp = fg.index_axis_mut(Axis(0), p);
        general_mat_mul(1.0, &f, &gk.slice(p), 0.0, &mut fgp);
        let w = mu.weights[p];
        for a in 0..ell {
            let fga = fgp.row(a);
            for c_idx in a..ell {
                c[[a, c_idx]] += w * fga.dot(&f.row(c_idx));
            }
        }
    }
    for a in 0..ell {
        for c_idx in 0..a {
            c[[a, c_idx]] = c[[c_idx, a]];
        }
    }
    Ok(CloudPass { trace, fg, matrix: ComparisonMatrix(c) })
}

/// Accumulates over points in index order; the upper triangle is computed and mirrored.
pub fn comparison_matrix(gk: &GramField, net: &FormNetwork, points: ArrayView2<'_, f64>, mu: &Measure) -> Result<ComparisonMatrix> {
    Ok(forward_cloud(gk, net, points, mu)?.matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutKind {
    /// Upper triangle including the diagonal, row-major.
    #[default]
    Tri,
    /// Full matrix, row-major.
    Flat,
    Diag,
    /// `(trace/ℓ, mean off-diagonal, Frobenius norm)`.
    Pool,
}

impl ReadoutKind {
    pub const ALL: [ReadoutKind; 4] = [ReadoutKind::Tri, ReadoutKind::Flat, ReadoutKind::Diag, ReadoutKind::Pool];

    pub fn feature_len(self, ell: usize) -> usize {
        match self {
            ReadoutKind::Tri => ell * (ell + 1) / 2,
            ReadoutKind::Flat => ell * ell,
            ReadoutKind::Diag => ell,
            ReadoutKind::Pool => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReadoutKind::Tri => "tri",
            ReadoutKind::Flat => "flat",
            ReadoutKind::Diag => "diag",
            ReadoutKind::Pool => "pool",
        }
    }
}

impl std::str::FromStr for ReadoutKind {
    type Err = NpfError;

    fn from_str(s: &str) -> Result<Self> {
        ReadoutKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| NpfError::InvalidParams(format!("unknown readout {s:?}; expected tri, flat, diag or pool")))
    }
}

pub fn readout(c: &ComparisonMatrix, kind: ReadoutKind) -> Vec<f64> {
    let m = &c.0;
    let ell = m.nrows();
    match kind {
        ReadoutKind::Tri => (0..ell).flat_map(|a| (a..ell).map(move |b| m[[a, b]])).collect(),
        ReadoutKind::Flat => m.iter().copied().collect(),
        ReadoutKind::Diag => m.diag().to_vec(),
        ReadoutKind::Pool => {
            let trace = m.diag().sum();
            let total: f64 = m.iter().sum();
            let off = if ell > 1 { (total - trace) / (ell * (ell - 1)) as f64 } else { 0.0 };
            let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            vec![trace / ell as f64, off, frob]
        }
    }
}

/// Gradient of `⟨d_feat, readout(C)⟩` with respect to the entries of `C`.
pub(crate) fn readout_backward(c: &ComparisonMatrix, kind: ReadoutKind, d_feat: &[f64]) -> Array2<f64> {
    let m = &c.0;
    let ell = m.nrows();
    let mut d = Array2::zeros((ell, ell));
    match kind {
        ReadoutKind::Tri => {
            let mut k = 0;
            for a in 0..ell {
                for b in a..ell {
                    d[[a, b]] = d_feat[k];
                    k += 1;
                }
            }
        }
        ReadoutKind::Flat => {
            for (dv, g) in d.iter_mut().zip(d_feat) {
                *dv = *g;
            }
        }
        ReadoutKind::Diag => {
            for a in 0..ell {
                d[[a, a]] = d_feat[a];
            }
        }
        ReadoutKind::Pool => {
            let off = if ell > 1 { d_feat[1] / (ell * (ell - 1)) as f64 } else { 0.0 };
            let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            for a in 0..ell {
                for b in 0..ell {
                    let mut g = if a == b { d_feat[0] / ell as f64 } else { off };
                    if frob > 0.0 {
                        g += d_feat[2] * m[[a, b]] / frob;
                    }
                    d[[a, b]] = g;
                }
            }
        }
    }
    d
}
