//! Neural k-forms: an MLP `R^D → R^{ℓ×B}` whose rows are form coefficients.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::multi_index::binomial;
use crate::error::{NpfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layer {
    weights: usize,
    bias: usize,
    fan_in: usize,
    fan_out: usize,
}

/// Fully connected network with `tanh` hidden layers and a linear output of size `ℓ·B`.
///
/// Parameters are stored flat, layer by layer, as a row-major `out × in` weight
/// matrix followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct FormNetwork {
    input_dim: usize,
    hidden: Vec<usize>,
    ell: usize,
    degree: usize,
    basis_len: usize,
    activation: Activation,
    layers: Vec<Layer>,
    params: Vec<f64>,
}

/// Per-layer outputs of one forward pass; entry 0 is the input.
#[derive(Debug, Clone, Default)]
pub struct ForwardTrace {
    acts: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map_or(&[], Vec::as_slice)
    }
}

/// Per-layer outputs for a batch of inputs, one row per input; entry 0 is the input.
#[derive(Debug, Clone, Default)]
pub struct BatchTrace {
    acts: Vec<Array2<f64>>,
}

impl BatchTrace {
    /// `m × ℓB`; row `p` is `F_θ(x_p)` flattened row-major.
    pub fn output(&self) -> ArrayView2<'_, f64> {
        self.acts.last().expect("trace has an output").view()
    }
}

impl FormNetwork {
    /// All-zero parameters.
    pub fn new(input_dim: usize, hidden: &[usize], ell: usize, degree: usize) -> Result<Self> {
        if degree < 1 || degree > input_dim {
            return Err(NpfError::InvalidDegree { k: degree, dim: input_dim });
        }
        if ell == 0 || hidden.contains(&0) {
            return Err(NpfError::InvalidParams("layer widths and ℓ must be positive".into()));
        }
        let basis_len = binomial(input_dim, degree);
        let mut widths = vec![input_dim];
        widths.extend_from_slice(hidden);
        widths.push(ell * basis_len);
        let mut layers = Vec::with_capacity(widths.len() - 1);
        let mut offset = 0;
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            layers.push(Layer { weights: offset, bias: offset + fan_in * fan_out, fan_in, fan_out });
            offset += fan_in * fan_out + fan_out;
        }
        Ok(Self {
            input_dim,
            hidden: hidden.to_vec(),
            ell,
            degree,
            basis_len,
            activation: Activation::Tanh,
            layers,
            params: vec![0.0; offset],
        })
    }

    /// Weights and biases drawn from `U(−1/√fan_in, 1/√fan_in)`.
    pub fn init_uniform(&mut self, rng: &mut impl Rng) {
        for layer in &self.layers {
            let bound = 1.0 / (layer.fan_in as f64).sqrt();
            let end = layer.bias + layer.fan_out;
            for p in &mut self.params[layer.weights..end] {
                *p = rng.random_range(-bound..bound);
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_len(&self) -> usize {
        self.basis_len
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Weight and bias slices of layer `i`.
    pub fn layer_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let l = self.layers[i];
        let (w, rest) = self.params[l.weights..].split_at_mut(l.fan_in * l.fan_out);
        (w, &mut rest[..l.fan_out])
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        if x.len() != self.input_dim {
            return Err(NpfError::LengthMismatch { expected: self.input_dim, got: x.len() });
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let input = &acts[li];
            let w = &self.params[l.weights..l.bias];
            let b = &self.params[l.bias..l.bias + l.fan_out];
            let mut out = b.to_vec();
            for (o, row) in out.iter_mut().zip(w.chunks_exact(l.fan_in)) {
                *o += row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
            }
            if li != last {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
        }
        Ok(ForwardTrace { acts })
    }

    fn weights(&self, l: &Layer) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((l.fan_out, l.fan_in), &self.params[l.weights..l.bias]).expect("layer shape")
    }

    /// Forward pass over the rows of `x`.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<BatchTrace> {
        if x.ncols() != self.input_dim {
            return Err(NpfError::LengthMismatch { expected: self.input_dim, got: x.ncols() });
        }
        let m = x.nrows();
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let bias = ndarray::ArrayView1::from(&self.params[l.bias..l.bias + l.fan_out]);
            let mut z = Array2::zeros((m, l.fan_out));
            z.assign(&bias.broadcast((m, l.fan_out)).expect("bias broadcast"));
            general_mat_mul(1.0, &acts[li], &self.weights(l).t(), 1.0, &mut z);
            if li != last {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        Ok(BatchTrace { acts })
    }

    /// Adds `∂/∂θ Σ_p ⟨d_out[p], F_θ(x_p)⟩` into `grad`.
    pub fn backward_batch(&self, trace: &BatchTrace, d_out: Array2<f64>, grad: &mut [f64]) {
        let mut delta = d_out;
        let last = self.layers.len() - 1;
        for li in (0..self.layers.len()).rev() {
            let l = self.layers[li];
            if li != last {
                ndarray::Zip::from(&mut delta).and(&trace.acts[li + 1]).for_each(|d, a| *d *= 1.0 - a * a);
            }
            let (gw, gb) = grad[l.weights..l.bias + l.fan_out].split_at_mut(l.fan_in * l.fan_out);
            let mut gw = ArrayViewMut2::from_shape((l.fan_out, l.fan_in), gw).expect("layer shape");
            general_mat_mul(1.0, &delta.t(), &trace.acts[li], 1.0, &mut gw);
            for (g, col) in gb.iter_mut().zip(delta.axis_iter(Axis(1))) {
                *g += col.sum();
            }
            if li > 0 {
                delta = delta.dot(&self.weights(&l));
            }
        }
    }

    /// `F_θ(x)` as an `ℓ × B` matrix; row `a` holds the coefficients of form `a`.
    pub fn forward(&self, x: &[f64]) -> Result<Array2<f64>> {
        let trace = self.forward_trace(x)?;
        Ok(Array2::from_shape_vec((self.ell, self.basis_len), trace.output().to_vec()).expect("output size is ℓ·B"))
    }

    /// Adds `∂/∂θ ⟨d_out, F_θ(x)⟩` into `grad`.
    pub fn backward(&self, trace: &ForwardTrace, d_out: &[f64], grad: &mut [f64]) {
        let mut delta = d_out.to_vec();
        let last = self.layers.len() - 1;
        for li in (0..self.layers.len()).rev() {
            let l = self.layers[li];
            if li != last {
                for (d, a) in delta.iter_mut().zip(&trace.acts[li + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let input = &trace.acts[li];
            let (gw, gb) = grad[l.weights..l.bias + l.fan_out].split_at_mut(l.fan_in * l.fan_out);
            for ((row, gb), d) in gw.chunks_exact_mut(l.fan_in).zip(gb.iter_mut()).zip(&delta) {
                *gb += d;
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if li > 0 {
                let w = &self.params[l.weights..l.bias];
                let mut next = vec![0.0; l.fan_in];
                for (row, d) in w.chunks_exact(l.fan_in).zip(&delta) {
                    for (n, wv) in next.iter_mut().zip(row) {
                        *n += d * wv;
                    }
                }
                delta = next;
            }
        }
    }
}
