//! Fixtures shared by the benchmarks.

use ndarray::Array2;
use npf_core::forms::model::{Example, FormModel, ModelSpec};
use npf_core::oracle::Manifold;
use npf_core::{GramField, LaplacianParams, Measure, ReadoutKind};
use npf_core::laplacian::IntrinsicDim;
use rand::Rng;

/// `m` points on a circle, noise-free.
pub fn circle(m: usize, seed: u64) -> Array2<f64> {
    Manifold::Circle.sample(m, seed).points
}

/// Points of a random 2-plane in `R^dim`, plus a little ambient noise.
pub fn plane_cloud(m: usize, dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = npf_core::rng::stream(seed, "bench/plane", 0);
    let basis = Array2::from_shape_fn((2, dim), |_| rng.random_range(-1.0..1.0));
    let coords = Array2::from_shape_fn((m, 2), |_| rng.random_range(-1.0..1.0));
    coords.dot(&basis) + Array2::from_shape_fn((m, dim), |_| rng.random_range(-0.01..0.01))
}

pub fn circle_params() -> LaplacianParams {
    LaplacianParams { dim: IntrinsicDim::Known(1), ..Default::default() }
}

/// Clouds, Gram fields and measures for a training batch.
pub struct Batch {
    pub ids: Vec<String>,
    pub points: Vec<Array2<f64>>,
    pub grams: Vec<GramField>,
    pub measures: Vec<Measure>,
}

impl Batch {
    pub fn circles(clouds: usize, m: usize) -> Self {
        let params = circle_params();
        let points: Vec<_> = (0..clouds).map(|c| circle(m, c as u64)).collect();
        let grams = points.iter().map(|p| npf_core::gram::gram_field(p.view(), &params, 1).unwrap()).collect();
        Self {
            ids: (0..clouds).map(|c| format!("c{c}")).collect(),
            measures: (0..clouds).map(|_| Measure::uniform(m)).collect(),
            points,
            grams,
        }
    }

    pub fn examples(&self) -> Vec<Example<'_>> {
        (0..self.ids.len())
            .map(|i| Example {
                id: &self.ids[i],
                points: self.points[i].view(),
                gram: &self.grams[i],
                measure: &self.measures[i],
                label: i % 2 == 0,
            })
            .collect()
    }
}

pub fn model(input_dim: usize, degree: usize) -> FormModel {
    let spec = ModelSpec { input_dim, hidden: vec![32, 32], ell: 8, degree, readout: ReadoutKind::Tri };
    let mut m = FormModel::new(&spec).unwrap();
    m.init_uniform(&mut npf_core::rng::stream(0, "bench/model", 0));
    m
}
