use crate::error::{NpfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    /// Every point weighs `1/m`; targets the density-weighted integral.
    Uniform,
    /// Point `i` weighs `1/(m q(p_i))`; targets the volume integral.
    DensityCorrected,
}

/// Discrete measure on a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub weights: Vec<f64>,
    pub mode: MeasureMode,
}

impl Measure {
    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m], mode: MeasureMode::Uniform }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Same measure with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * c).collect(), mode: self.mode }
    }

    /// Reorders weights so that new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { weights: perm.iter().map(|&i| self.weights[i]).collect(), mode: self.mode }
    }
}

pub fn measure_weights(m: usize, density: Option<&[f64]>, mode: MeasureMode) -> Result<Measure> {
    match mode {
        MeasureMode::Uniform => Ok(Measure::uniform(m)),
        MeasureMode::DensityCorrected => {
            let q = density.ok_or_else(|| {
                NpfError::DegenerateDensity("density-corrected measure needs a density".into())
            })?;
            if q.len() != m {
                return Err(NpfError::LengthMismatch { expected: m, got: q.len() });
            }
            if let Some(i) = q.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(NpfError::DegenerateDensity(format!(
                    "density at point {i} is {}",
                    q[i]
                )));
            }
            let weights = q.iter().map(|&v| 1.0 / (m as f64 * v)).collect();
            Ok(Measure { weights, mode })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights() {
        let mu = measure_weights(4, None, MeasureMode::Uniform).unwrap();
        assert_eq!(mu.weights, vec![0.25; 4]);
    }

    #[test]
    fn density_corrected_weights() {
        let q = [0.5, 0.25];
        let mu = measure_weights(2, Some(&q), MeasureMode::DensityCorrected).unwrap();
        assert_eq!(mu.weights, vec![1.0, 2.0]);
        for (w, qi) in mu.weights.iter().zip(q) {
            assert_eq!(w * qi, 0.5);
        }
    }

    #[test]
    fn zero_density_rejected() {
        let q = [0.5, 0.0];
        let err = measure_weights(2, Some(&q), MeasureMode::DensityCorrected).unwrap_err();
        assert!(matches!(err, NpfError::DegenerateDensity(_)));
        let q = [0.5, -1.0];
        assert!(measure_weights(2, Some(&q), MeasureMode::DensityCorrected).is_err());
    }
}
