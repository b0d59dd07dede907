//! Form network plus logistic head, binary cross-entropy and its gradient.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::comparison::{forward_cloud, readout, readout_backward, ReadoutKind};
use super::network::FormNetwork;
use crate::data::measure::Measure;
use crate::error::{NpfError, Result};
use crate::gram::GramField;

/// Architecture of a [`FormModel`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub ell: usize,
    pub degree: usize,
    pub readout: ReadoutKind,
}

/// Linear logistic head.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Classifier {
    pub fn zeros(n: usize) -> Self {
        Self { weights: vec![0.0; n], bias: 0.0 }
    }

    pub fn logit(&self, features: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormModel {
    pub net: FormNetwork,
    pub head: Classifier,
    pub readout: ReadoutKind,
}

/// One labelled cloud with its precomputed Gram field and measure.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub id: &'a str,
    pub points: ArrayView2<'a, f64>,
    pub gram: &'a GramField,
    pub measure: &'a Measure,
    pub label: bool,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `−y log σ(z) − (1−y) log(1−σ(z))`.
pub fn bce_with_logit(z: f64, label: bool) -> f64 {
    if label {
        softplus(-z)
    } else {
        softplus(z)
    }
}

impl FormModel {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let net = FormNetwork::new(spec.input_dim, &spec.hidden, spec.ell, spec.degree)?;
        Ok(Self { head: Classifier::zeros(spec.readout.feature_len(spec.ell)), net, readout: spec.readout })
    }

    /// Network and head initialised from `U(±1/√fan_in)`.
    pub fn init_uniform(&mut self, rng: &mut impl Rng) {
        self.net.init_uniform(rng);
        let bound = 1.0 / (self.head.weights.len() as f64).sqrt();
        for w in &mut self.head.weights {
            *w = rng.random_range(-bound..bound);
        }
        self.head.bias = rng.random_range(-bound..bound);
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            input_dim: self.net.input_dim(),
            hidden: self.net.hidden().to_vec(),
            ell: self.net.ell(),
            degree: self.net.degree(),
            readout: self.readout,
        }
    }

    pub fn num_params(&self) -> usize {
        self.net.num_params() + self.head.weights.len() + 1
    }

    /// Network parameters, then head weights, then head bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.net.params().to_vec();
        p.extend_from_slice(&self.head.weights);
        p.push(self.head.bias);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(NpfError::LengthMismatch { expected: self.num_params(), got: params.len() });
        }
        let n = self.net.num_params();
        self.net.params_mut().copy_from_slice(&params[..n]);
        let h = self.head.weights.len();
        self.head.weights.copy_from_slice(&params[n..n + h]);
        self.head.bias = params[n + h];
        Ok(())
    }

    pub fn features(&self, ex: &Example<'_>) -> Result<Vec<f64>> {
        let pass = forward_cloud(ex.gram, &self.net, ex.points, ex.measure)?;
        Ok(readout(&pass.matrix, self.readout))
    }

    pub fn logit(&self, ex: &Example<'_>) -> Result<f64> {
        let z = self.head.logit(&self.features(ex)?);
        if !z.is_finite() {
            return Err(NpfError::NumericFailure { cloud: ex.id.to_string() });
        }
        Ok(z)
    }

    /// Summed loss over `batch` without gradients.
    pub fn loss(&self, batch: &[Example<'_>]) -> Result<f64> {
        let mut total = 0.0;
        for ex in batch {
            total += bce_with_logit(self.logit(ex)?, ex.label);
        }
        Ok(total)
    }
}

/// Summed binary cross-entropy over `batch` and its gradient in [`FormModel::params`] order.
pub fn loss_and_grad(model: &FormModel, batch: &[Example<'_>]) -> Result<(f64, Vec<f64>)> {
    let n_net = model.net.num_params();
    let n_head = model.head.weights.len();
    let mut grad = vec![0.0; model.num_params()];
    let mut total = 0.0;
    let (ell, b) = (model.net.ell(), model.net.basis_len());
    for ex in batch {
        let pass = forward_cloud(ex.gram, &model.net, ex.points, ex.measure)?;
        let feats = readout(&pass.matrix, model.readout);
        let z = model.head.logit(&feats);
        let loss = bce_with_logit(z, ex.label);
        if !loss.is_finite() {
            return Err(NpfError::NumericFailure { cloud: ex.id.to_string() });
        }
        total += loss;
        let dz = sigmoid(z) - f64::from(u8::from(ex.label));
        for (g, x) in grad[n_net..n_net + n_head].iter_mut().zip(&feats) {
            *g += dz * x;
        }
        grad[n_net + n_head] += dz;
        let d_feat: Vec<f64> = model.head.weights.iter().map(|w| dz * w).collect();
        let dc = readout_backward(&pass.matrix, model.readout, &d_feat);
        // C is symmetrised, so dL/dF_p = μ_p (dC + dCᵀ) F_p G_p
        let sym = &dc + &dc.t();
        let m = ex.gram.len();
        let mut d_out = Array2::zeros((m, ell * b));
        for p in 0..m {
            let mut row = d_out.row_mut(p).into_shape_with_order((ell, b)).expect("row is ℓ·B");
            general_mat_mul(ex.measure.weights[p], &sym, &pass.fg.index_axis(Axis(0), p), 0.0, &mut row);
        }
        model.net.backward_batch(&pass.trace, d_out, &mut grad[..n_net]);
    }
    Ok((total, grad))
}
