//! Two-class splicing-kinetics trajectories that differ on a few genes.

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ode::{integrate_ode, KineticsField};
use crate::data::PointCloud;
use crate::error::{NpfError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RnaConfig {
    pub genes: usize,
    pub perturbed_genes: usize,
    /// Relative class shift of `(α, β, γ)` on perturbed genes; sign drawn per gene and rate.
    pub shift: f64,
    /// Standard deviation of the per-trajectory log-normal rate jitter.
    pub jitter: f64,
    pub sigma_obs: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub clouds_per_class: usize,
    pub t1: f64,
    /// Log-scale spread of the initial state around the base steady state.
    pub x0_spread: f64,
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub gamma_range: [f64; 2],
    /// Both classes use the base parameters; a no-signal control.
    pub control: bool,
}

impl Default for RnaConfig {
    fn default() -> Self {
        Self {
            genes: 24,
            perturbed_genes: 5,
            shift: 0.3,
            jitter: 0.1,
            sigma_obs: 0.05,
            k_min: 64,
            k_max: 192,
            clouds_per_class: 80,
            t1: 4.0,
            x0_spread: 0.2,
            alpha_range: [1.0, 3.0],
            beta_range: [0.5, 1.5],
            gamma_range: [0.2, 1.0],
            control: false,
        }
    }
}

/// Base rates shared by both classes and the class-1 rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RnaClasses {
    pub base: KineticsField,
    pub shifted: KineticsField,
    pub perturbed: Vec<usize>,
}

impl RnaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.genes == 0 || self.perturbed_genes > self.genes || self.clouds_per_class == 0 {
            return Err(NpfError::Config("need genes >= 1, perturbed <= genes, clouds > 0".into()));
        }
        if self.k_min < 2 || self.k_min > self.k_max {
            return Err(NpfError::Config(format!("need 2 <= k_min <= k_max, got {}..{}", self.k_min, self.k_max)));
        }
        for r in [self.alpha_range, self.beta_range, self.gamma_range] {
            if !(r[0] > 0.0 && r[0] <= r[1]) {
                return Err(NpfError::Config(format!("rate range {r:?} must be positive and ordered")));
            }
        }
        if !(self.shift >= 0.0 && self.shift < 1.0 && self.jitter >= 0.0 && self.sigma_obs >= 0.0 && self.x0_spread >= 0.0 && self.t1 > 0.0) {
            return Err(NpfError::Config("shift must lie in [0, 1); jitter, noise, spread nonnegative; t1 positive".into()));
        }
        Ok(())
    }

    pub fn classes(&self, seed: u64) -> Result<RnaClasses> {
        self.validate()?;
        let mut rng = crate::rng::stream(seed, "rna/rates", 0);
        let mut draw = |r: [f64; 2]| (0..self.genes).map(|_| rng.random_range(r[0]..=r[1])).collect::<Vec<f64>>();
        let base = KineticsField::new(draw(self.alpha_range), draw(self.beta_range), draw(self.gamma_range))?;
        let mut rng = crate::rng::stream(seed, "rna/perturbation", 0);
        let mut perturbed = index::sample(&mut rng, self.genes, self.perturbed_genes).into_vec();
        perturbed.sort_unstable();
        let mut shifted = base.clone();
        if !self.control {
            for &g in &perturbed {
                for rates in [&mut shifted.alpha, &mut shifted.beta, &mut shifted.gamma] {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    rates[g] *= 1.0 + sign * self.shift;
                }
            }
        }
        Ok(RnaClasses { base, shifted, perturbed })
    }
}

fn jittered(field: &KineticsField, sd: f64, rng: &mut impl Rng) -> Result<KineticsField> {
    if sd == 0.0 {
        return Ok(field.clone());
    }
    let normal = Normal::new(0.0, sd).map_err(|e| NpfError::Config(e.to_string()))?;
    let mut j = |v: &[f64]| v.iter().map(|x| x * normal.sample(rng).exp()).collect::<Vec<f64>>();
    KineticsField::new(j(&field.alpha), j(&field.beta), j(&field.gamma))
}

/// Label 1 for the shifted class; ids `rna1-0000…` and `rna0-0000…`.
///
/// Each trajectory is integrated on `k_max` uniform time points over `[0, t1]`
/// and truncated to its first `k_i ~ U{k_min..k_max}` states.
pub fn gen_rna_kinetics(config: &RnaConfig, seed: u64) -> Result<Vec<PointCloud>> {
    let classes = config.classes(seed)?;
    let steady = classes.base.steady_state();
    let noise = Normal::new(0.0, config.sigma_obs).map_err(|e| NpfError::Config(e.to_string()))?;
    let spread = Normal::new(0.0, config.x0_spread).map_err(|e| NpfError::Config(e.to_string()))?;
    let mut clouds = Vec::with_capacity(2 * config.clouds_per_class);
    for (label, field) in [(1, &classes.shifted), (0, &classes.base)] {
        for c in 0..config.clouds_per_class {
            let mut rng = crate::rng::stream(seed, &format!("rna/class{label}"), c as u64);
            let x0: Vec<f64> = steady.iter().map(|s| s * spread.sample(&mut rng).exp()).collect();
            let f = jittered(field, config.jitter, &mut rng)?;
            let k = rng.random_range(config.k_min..=config.k_max);
            let traj = integrate_ode(&f, &x0, 0.0, config.t1, config.k_max - 1)?;
            let dim = traj.ncols();
            let mut points = Array2::zeros((k, dim));
            for i in 0..k {
                for d in 0..dim {
                    points[[i, d]] = traj[[i, d]] + if config.sigma_obs > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                }
            }
            clouds.push(PointCloud::new(format!("rna{label}-{c:04}"), points)?.with_label(label));
        }
    }
    Ok(clouds)
}
