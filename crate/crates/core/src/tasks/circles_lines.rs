//! Circles versus lines: trajectories of `(y, −x)` and `(x, y)` from random starts.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ode::{integrate_ode, CircleField, LineField, OdeField};
use crate::data::PointCloud;
use crate::error::{NpfError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CirclesLinesConfig {
    pub clouds_per_class: usize,
    pub points: usize,
    pub sigma_obs: f64,
    pub radius_min: f64,
    pub radius_max: f64,
    pub t1: f64,
    /// RK4 steps; trajectory states are subsampled from these.
    pub steps: usize,
}

impl Default for CirclesLinesConfig {
    fn default() -> Self {
        Self { clouds_per_class: 300, points: 128, sigma_obs: 0.02, radius_min: 0.5, radius_max: 1.5, t1: 1.5, steps: 512 }
    }
}

impl CirclesLinesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clouds_per_class == 0 || self.points < 2 || self.points > self.steps + 1 {
            return Err(NpfError::Config(format!(
                "need clouds > 0 and 2 <= points <= steps + 1, got {} clouds, {} points, {} steps",
                self.clouds_per_class, self.points, self.steps
            )));
        }
        if !(self.sigma_obs >= 0.0 && 0.0 < self.radius_min && self.radius_min <= self.radius_max && self.t1 > 0.0) {
            return Err(NpfError::Config("invalid noise, radius range or time window".into()));
        }
        Ok(())
    }
}

/// Label 1 for circles, 0 for lines; ids `circle-0000…` and `line-0000…`.
pub fn gen_circles_lines(config: &CirclesLinesConfig, seed: u64) -> Result<Vec<PointCloud>> {
    config.validate()?;
    let noise = Normal::new(0.0, config.sigma_obs).map_err(|e| NpfError::Config(e.to_string()))?;
    let mut clouds = Vec::with_capacity(2 * config.clouds_per_class);
    for (label, name, field) in [(1, "circle", &CircleField as &dyn OdeField), (0, "line", &LineField)] {
        for c in 0..config.clouds_per_class {
            let mut rng = crate::rng::stream(seed, &format!("circles-lines/{name}"), c as u64);
            let r = rng.random_range(config.radius_min..=config.radius_max);
            let phi = rng.random_range(0.0..2.0 * PI);
            let traj = integrate_ode(field, &[r * phi.cos(), r * phi.sin()], 0.0, config.t1, config.steps)?;
            let mut picks = index::sample(&mut rng, config.steps + 1, config.points).into_vec();
            picks.sort_unstable();
            let mut points = Array2::zeros((config.points, 2));
            for (row, &t) in picks.iter().enumerate() {
                for d in 0..2 {
                    points[[row, d]] = traj[[t, d]] + if config.sigma_obs > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                }
            }
            clouds.push(PointCloud::new(format!("{name}-{c:04}"), points)?.with_label(label));
        }
    }
    Ok(clouds)
}
