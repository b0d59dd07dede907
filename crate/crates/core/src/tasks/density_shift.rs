//! Von Mises circle clouds at several concentrations, with true densities attached.

use crate::data::PointCloud;
use crate::error::{NpfError, Result};
use crate::oracle::vonmises::sample_von_mises;

/// Label is the index into `kappas`; ids `vm{index}-{cloud:04}`.
pub fn gen_density_shift(kappas: &[f64], n: usize, clouds: usize, seed: u64) -> Result<Vec<PointCloud>> {
    if kappas.iter().any(|&k| !(k >= 0.0 && k.is_finite())) {
        return Err(NpfError::Config(format!("kappas must be finite and nonnegative, got {kappas:?}")));
    }
    let mut out = Vec::with_capacity(kappas.len() * clouds);
    for (i, &kappa) in kappas.iter().enumerate() {
        for c in 0..clouds {
            let mut rng = crate::rng::stream(seed, &format!("density-shift/{i}"), c as u64);
            let s = sample_von_mises(kappa, 0.0, n, &mut rng)?;
            out.push(PointCloud::new(format!("vm{i}-{c:04}"), s.points)?.with_label(i as i64).with_density(s.density)?);
        }
    }
    Ok(out)
}
