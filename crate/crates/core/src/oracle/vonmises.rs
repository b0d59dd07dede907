//! Von Mises distribution on the unit circle.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;

use crate::error::{NpfError, Result};

/// Modified Bessel function `I₀` by its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..10_000 {
        term *= q / (j as f64 * j as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Density with respect to arc length.
pub fn von_mises_density(theta: f64, kappa: f64, mu: f64) -> f64 {
    // scaled form avoids overflow of I₀ and the exponential for large κ
    let log_norm = (2.0 * PI).ln() + kappa + (bessel_i0(kappa) * (-kappa).exp()).ln();
    (kappa * (theta - mu).cos() - log_norm).exp()
}

#[derive(Debug, Clone)]
pub struct VonMisesSample {
    pub angles: Vec<f64>,
    /// `(cos θ, sin θ)` rows.
    pub points: Array2<f64>,
    pub density: Vec<f64>,
}

/// Rejection sampling from a uniform envelope; angles lie in `[0, 2π)`.
pub fn sample_von_mises(kappa: f64, mu: f64, n: usize, rng: &mut impl Rng) -> Result<VonMisesSample> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(NpfError::InvalidParams(format!("kappa must be finite and ≥ 0, got {kappa}")));
    }
    let mut angles = Vec::with_capacity(n);
    while angles.len() < n {
        let theta = rng.random_range(0.0..2.0 * PI);
        let accept = (kappa * ((theta - mu).cos() - 1.0)).exp();
        if kappa == 0.0 || rng.random::<f64>() < accept {
            angles.push(theta);
        }
    }
    let points = Array2::from_shape_fn((n, 2), |(i, c)| if c == 0 { angles[i].cos() } else { angles[i].sin() });
    let density = angles.iter().map(|&t| von_mises_density(t, kappa, mu)).collect();
    Ok(VonMisesSample { angles, points, density })
}

pub fn von_mises_sampler(kappa: f64, mu: f64, n: usize, seed: u64) -> Result<VonMisesSample> {
    sample_von_mises(kappa, mu, n, &mut crate::rng::stream(seed, "von-mises", 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quadrature::integrate;

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i0(8.0) - 427.564_115_721_804_7).abs() < 1e-9);
    }

    #[test]
    fn density_normalised() {
        for kappa in [0.0, 0.5, 2.0, 8.0, 40.0] {
            let total = integrate(|t| Ok(von_mises_density(t, kappa, 0.3)), 0.0, 2.0 * PI, 1e-12).unwrap();
            assert!((total - 1.0).abs() <= 1e-8, "kappa {kappa}: {total}");
        }
    }

    #[test]
    fn uniform_when_kappa_zero() {
        let s = von_mises_sampler(0.0, 0.0, 4000, 11).unwrap();
        let bins = 20;
        let mut counts = vec![0usize; bins];
        for &t in &s.angles {
            counts[((t / (2.0 * PI)) * bins as f64) as usize % bins] += 1;
        }
        let expected = 4000.0 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99th percentile of χ² with 19 degrees of freedom
        assert!(chi2 < 36.19, "chi2 = {chi2}");
        assert!(s.density.iter().all(|&q| (q - 1.0 / (2.0 * PI)).abs() < 1e-15));
    }

    #[test]
    fn concentrated_mean_direction() {
        let s = von_mises_sampler(4.0, 0.0, 2000, 3).unwrap();
        let (c, sn) = s.angles.iter().fold((0.0, 0.0), |(c, sn), t| (c + t.cos(), sn + t.sin()));
        assert!(sn.atan2(c).abs() < 0.1);
        for (t, q) in s.angles.iter().zip(&s.density) {
            assert!((q - von_mises_density(*t, 4.0, 0.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_negative_kappa() {
        assert!(von_mises_sampler(-1.0, 0.0, 3, 0).is_err());
    }
}
