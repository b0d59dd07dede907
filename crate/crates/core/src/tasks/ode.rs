//! Vector fields and fixed-step RK4 integration.

use ndarray::Array2;

use crate::error::{NpfError, Result};

pub trait OdeField {
    fn dim(&self) -> usize;
    /// Writes `ẋ = F(x)` into `out`.
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

/// Rotation `(ẋ, ẏ) = (y, −x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CircleField;

/// Radial growth `(ẋ, ẏ) = (x, y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LineField;

impl OdeField for CircleField {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[1];
        out[1] = -x[0];
    }
}

impl OdeField for LineField {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

/// Splicing kinetics per gene: `u̇ = α − βu`, `ṡ = βu − γs`; state `(u_1, s_1, u_2, s_2, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticsField {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl KineticsField {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.len() != gamma.len() || alpha.is_empty() {
            return Err(NpfError::Config("kinetic parameter vectors must be nonempty and of equal length".into()));
        }
        if alpha.iter().chain(&beta).chain(&gamma).any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(NpfError::Config("kinetic rates must be positive and finite".into()));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn genes(&self) -> usize {
        self.alpha.len()
    }

    /// `(α/β, α/γ)` per gene.
    pub fn steady_state(&self) -> Vec<f64> {
        (0..self.genes()).flat_map(|g| [self.alpha[g] / self.beta[g], self.alpha[g] / self.gamma[g]]).collect()
    }
}

impl OdeField for KineticsField {
    fn dim(&self) -> usize {
        2 * self.genes()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for g in 0..self.genes() {
            let (u, s) = (x[2 * g], x[2 * g + 1]);
            out[2 * g] = self.alpha[g] - self.beta[g] * u;
            out[2 * g + 1] = self.beta[g] * u - self.gamma[g] * s;
        }
    }
}

/// Classical RK4 with `steps` uniform steps; returns `steps + 1` states including both endpoints.
pub fn integrate_ode(field: &dyn OdeField, x0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Array2<f64>> {
    let n = field.dim();
    if x0.len() != n {
        return Err(NpfError::LengthMismatch { expected: n, got: x0.len() });
    }
    if steps < 2 || !(t1 > t0) {
        return Err(NpfError::InvalidParams(format!("need steps >= 2 and t1 > t0, got steps={steps}, [{t0}, {t1}]")));
    }
    let h = (t1 - t0) / steps as f64;
    let mut out = Array2::zeros((steps + 1, n));
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    out.row_mut(0).assign(&ndarray::ArrayView1::from(&x));
    for step in 1..=steps {
        field.eval(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        field.eval(&tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NpfError::IntegrationBlowup { step });
        }
        out.row_mut(step).assign(&ndarray::ArrayView1::from(&x));
    }
    Ok(out)
}
