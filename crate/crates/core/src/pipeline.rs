//! Glue between generated clouds, Gram caches and training.

use crate::data::measure::{measure_weights, Measure, MeasureMode};
use crate::data::PointCloud;
use crate::error::{NpfError, Result};
use crate::forms::model::Example;
use crate::forms::train::{train, TrainConfig, TrainOutcome};
use crate::gram::{compound_gram_field, gram_field_1, GramField};
use crate::laplacian::{build_laplacian, LaplacianParams};

/// Gram field of one cloud plus the pilot density it was built with.
#[derive(Debug, Clone)]
pub struct Precomputed {
    pub gram: GramField,
    pub density: Vec<f64>,
}

pub fn precompute_cloud(cloud: &PointCloud, params: &LaplacianParams, degree: usize) -> Result<Precomputed> {
    let op = build_laplacian(cloud.points.view(), params)?;
    let g1 = gram_field_1(&op, cloud.points.view())?;
    let gram = if degree == 1 { g1 } else { compound_gram_field(&g1, degree)? };
    Ok(Precomputed { gram, density: op.density.q0.clone() })
}

/// Precomputes every cloud; the error names the first cloud that failed.
pub fn precompute_all(clouds: &[PointCloud], params: &LaplacianParams, degree: usize) -> Result<Vec<Precomputed>> {
    clouds
        .iter()
        .map(|c| {
            precompute_cloud(c, params, degree).map_err(|e| NpfError::Cloud { id: c.id.clone(), source: Box::new(e) })
        })
        .collect()
}

/// Measure for a cloud: true density when the cloud carries one, otherwise the estimate.
pub fn cloud_measure(cloud: &PointCloud, estimated: &[f64], mode: MeasureMode) -> Result<Measure> {
    let q = cloud.density.as_deref().unwrap_or(estimated);
    measure_weights(cloud.len(), Some(q), mode)
}

pub fn binary_label(cloud: &PointCloud) -> Result<bool> {
    match cloud.label {
        Some(0) => Ok(false),
        Some(1) => Ok(true),
        other => Err(NpfError::Config(format!(
            "cloud {} has label {other:?}; training needs labels 0 or 1",
            cloud.id
        ))),
    }
}

pub fn examples<'a>(clouds: &'a [PointCloud], grams: &'a [GramField], measures: &'a [Measure]) -> Result<Vec<Example<'a>>> {
    if grams.len() != clouds.len() {
        return Err(NpfError::LengthMismatch { expected: clouds.len(), got: grams.len() });
    }
    if measures.len() != clouds.len() {
        return Err(NpfError::LengthMismatch { expected: clouds.len(), got: measures.len() });
    }
    clouds
        .iter()
        .zip(grams)
        .zip(measures)
        .map(|((c, g), mu)| {
            Ok(Example { id: &c.id, points: c.points.view(), gram: g, measure: mu, label: binary_label(c)? })
        })
        .collect()
}

/// Precompute, build examples and train in one go.
pub fn run_task(clouds: &[PointCloud], params: &LaplacianParams, config: &TrainConfig) -> Result<TrainOutcome> {
    let pre = precompute_all(clouds, params, config.degree)?;
    let measures = clouds
        .iter()
        .zip(&pre)
        .map(|(c, p)| cloud_measure(c, &p.density, config.measure))
        .collect::<Result<Vec<_>>>()?;
    let grams: Vec<GramField> = pre.into_iter().map(|p| p.gram).collect();
    let ex = examples(clouds, &grams, &measures)?;
    train(&ex, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn labels_must_be_binary() {
        let c = PointCloud::new("a", array![[0.0], [1.0]]).unwrap().with_label(2);
        assert!(binary_label(&c).is_err());
        assert!(binary_label(&c.clone().with_label(1)).unwrap());
    }

    #[test]
    fn true_density_wins_over_estimate() {
        let c = PointCloud::new("a", array![[0.0], [1.0]]).unwrap().with_density(vec![0.5, 0.25]).unwrap();
        let mu = cloud_measure(&c, &[1.0, 1.0], MeasureMode::DensityCorrected).unwrap();
        assert_eq!(mu.weights, vec![1.0, 2.0]);
    }
}
