//! Closed-form Gram fields and inner products on embedded manifolds.

pub mod quadrature;
pub mod study;
pub mod vonmises;

use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::multi_index::multi_index_table;
use crate::error::{NpfError, Result};
use crate::gram::{compound_matrix, GramField};

pub use quadrature::{integrate, integrate_box};
pub use study::{
    convergence_study, density_check, DensityCheck, DensityReport, DensityRow, DensitySource, DensitySummary, EpsilonSchedule,
    StudyConfig, StudyReport, StudyRow,
};
pub use vonmises::{bessel_i0, von_mises_density, von_mises_sampler, VonMisesSample};

/// Built-in embedded manifolds with a chart, tangent frame and sampling density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Manifold {
    /// Unit circle in R², uniform density; chart θ ∈ [0, 2π).
    Circle,
    /// Unit circle with a von Mises density.
    VonMisesCircle { kappa: f64, mu: f64 },
    /// Segment `u·v`, `|u| ≤ half_length`, `v` a unit vector in R², uniform density.
    Segment { direction: [f64; 2], half_length: f64 },
    /// Unit sphere in R³, uniform density; chart (polar θ ∈ [0, π], azimuth φ ∈ [0, 2π)).
    Sphere,
    /// `(cos a, sin a, cos b, sin b)` in R⁴, uniform density.
    FlatTorus,
}

/// Points sampled from a manifold together with their chart parameters and true density.
#[derive(Debug, Clone)]
pub struct ManifoldSample {
    pub points: Array2<f64>,
    pub params: Vec<Vec<f64>>,
    pub density: Vec<f64>,
}

/// Integration weighting for global inner products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Riemannian volume `dV`.
    Volume,
    /// Sampling density `q dV`.
    Density,
}

impl Manifold {
    pub fn diagonal_line() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Manifold::Segment { direction: [s, s], half_length: 1.0 }
    }

    /// Parses `circle`, `line`, `sphere`, `torus` or `von-mises:<kappa>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "circle" => Ok(Manifold::Circle),
            "line" | "segment" => Ok(Manifold::diagonal_line()),
            "sphere" => Ok(Manifold::Sphere),
            "torus" => Ok(Manifold::FlatTorus),
            _ => match name.strip_prefix("von-mises:") {
                Some(k) => {
                    let kappa: f64 = k.parse().map_err(|_| NpfError::InvalidParams(format!("bad kappa {k:?}")))?;
                    if kappa < 0.0 {
                        return Err(NpfError::InvalidParams(format!("kappa must be ≥ 0, got {kappa}")));
                    }
                    Ok(Manifold::VonMisesCircle { kappa, mu: 0.0 })
                }
                None => Err(NpfError::InvalidParams(format!("unknown manifold {name:?}"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Manifold::Circle => "circle".into(),
            Manifold::VonMisesCircle { kappa, .. } => format!("von-mises:{kappa}"),
            Manifold::Segment { .. } => "line".into(),
            Manifold::Sphere => "sphere".into(),
            Manifold::FlatTorus => "torus".into(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Manifold::Circle | Manifold::VonMisesCircle { .. } | Manifold::Segment { .. } => 2,
            Manifold::Sphere => 3,
            Manifold::FlatTorus => 4,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Manifold::Circle | Manifold::VonMisesCircle { .. } | Manifold::Segment { .. } => 1,
            Manifold::Sphere | Manifold::FlatTorus => 2,
        }
    }

    /// Chart domain as a box.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        match self {
            Manifold::Circle | Manifold::VonMisesCircle { .. } => vec![(0.0, 2.0 * PI)],
            Manifold::Segment { half_length, .. } => vec![(-half_length, *half_length)],
            Manifold::Sphere => vec![(0.0, PI), (0.0, 2.0 * PI)],
            Manifold::FlatTorus => vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        }
    }

    pub fn check_domain(&self, u: &[f64]) -> Result<()> {
        let domain = self.domain();
        if u.len() != domain.len() {
            return Err(NpfError::OutsideDomain(format!("{} expects {} chart parameters, got {}", self.name(), domain.len(), u.len())));
        }
        for (x, (a, b)) in u.iter().zip(&domain) {
            if !(x >= a && x <= b) {
                return Err(NpfError::OutsideDomain(format!("{x} not in [{a}, {b}] for {}", self.name())));
            }
        }
        Ok(())
    }

    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        match *self {
            Manifold::Circle | Manifold::VonMisesCircle { .. } => vec![u[0].cos(), u[0].sin()],
            Manifold::Segment { direction, .. } => vec![u[0] * direction[0], u[0] * direction[1]],
            Manifold::Sphere => {
                let (st, ct) = u[0].sin_cos();
                let (sp, cp) = u[1].sin_cos();
                vec![st * cp, st * sp, ct]
            }
            Manifold::FlatTorus => vec![u[0].cos(), u[0].sin(), u[1].cos(), u[1].sin()],
        }
    }

    /// Orthonormal basis of the tangent space at `embed(u)`.
    pub fn tangent_frame(&self, u: &[f64]) -> Vec<Vec<f64>> {
        match *self {
            Manifold::Circle | Manifold::VonMisesCircle { .. } => vec![vec![-u[0].sin(), u[0].cos()]],
            Manifold::Segment { direction, .. } => vec![direction.to_vec()],
            Manifold::Sphere => {
                let (st, ct) = u[0].sin_cos();
                let (sp, cp) = u[1].sin_cos();
                vec![vec![ct * cp, ct * sp, -st], vec![-sp, cp, 0.0]]
            }
            Manifold::FlatTorus => vec![
                vec![-u[0].sin(), u[0].cos(), 0.0, 0.0],
                vec![0.0, 0.0, -u[1].sin(), u[1].cos()],
            ],
        }
    }

    /// `√det g` of the chart.
    pub fn volume_element(&self, u: &[f64]) -> f64 {
        match self {
            Manifold::Sphere => u[0].sin(),
            _ => 1.0,
        }
    }

    /// Sampling density with respect to the volume measure.
    pub fn density(&self, u: &[f64]) -> f64 {
        match *self {
            Manifold::Circle => 1.0 / (2.0 * PI),
            Manifold::VonMisesCircle { kappa, mu } => von_mises_density(u[0], kappa, mu),
            Manifold::Segment { half_length, .. } => 0.5 / half_length,
            Manifold::Sphere => 1.0 / (4.0 * PI),
            Manifold::FlatTorus => 1.0 / (4.0 * PI * PI),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> ManifoldSample {
        let mut rng = crate::rng::stream(seed, "manifold-sample", 0);
        let params: Vec<Vec<f64>> = match *self {
            Manifold::Circle => (0..n).map(|_| vec![rng.random_range(0.0..2.0 * PI)]).collect(),
            Manifold::VonMisesCircle { kappa, mu } => vonmises::sample_von_mises(kappa, mu, n, &mut rng)
                .map(|s| s.angles.into_iter().map(|t| vec![t]).collect())
                .unwrap_or_default(),
            Manifold::Segment { half_length, .. } => {
                (0..n).map(|_| vec![rng.random_range(-half_length..=half_length)]).collect()
            }
            Manifold::Sphere => (0..n)
                .map(|_| {
                    let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
                    let phi = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
                    vec![theta, phi]
                })
                .collect(),
            Manifold::FlatTorus => (0..n)
                .map(|_| vec![rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)])
                .collect(),
        };
        let dim = self.ambient_dim();
        let mut points = Array2::zeros((params.len(), dim));
        for (i, u) in params.iter().enumerate() {
            for (c, x) in self.embed(u).into_iter().enumerate() {
                points[[i, c]] = x;
            }
        }
        let density = params.iter().map(|u| self.density(u)).collect();
        ManifoldSample { points, params, density }
    }
}

/// Tangent projector `Π = Σ_a t_a t_aᵀ` at chart parameter `u`.
pub fn oracle_gram_1(manifold: &Manifold, u: &[f64]) -> Result<Array2<f64>> {
    manifold.check_domain(u)?;
    let dim = manifold.ambient_dim();
    let mut pi = Array2::zeros((dim, dim));
    for t in manifold.tangent_frame(u) {
        for i in 0..dim {
            for j in 0..dim {
                pi[[i, j]] += t[i] * t[j];
            }
        }
    }
    Ok(pi)
}

/// Compound of the tangent projector: all `k×k` minors in multi-index order.
pub fn oracle_gram_k(manifold: &Manifold, u: &[f64], degree: usize) -> Result<Array2<f64>> {
    let table = multi_index_table(manifold.ambient_dim(), degree)?;
    let g1 = oracle_gram_1(manifold, u)?;
    Ok(if degree == 1 { g1 } else { compound_matrix(g1.view(), &table) })
}

/// Oracle Gram field at the chart parameters of a sample.
pub fn oracle_gram_field(manifold: &Manifold, params: &[Vec<f64>], degree: usize) -> Result<GramField> {
    let table = multi_index_table(manifold.ambient_dim(), degree)?;
    let b = table.len();
    let mut values = Array3::zeros((params.len(), b, b));
    for (p, u) in params.iter().enumerate() {
        values.index_axis_mut(ndarray::Axis(0), p).assign(&oracle_gram_k(manifold, u, degree)?);
    }
    GramField::from_parts(table, values)
}

/// `∫_M ⟨ι*ω, ι*η⟩ dV` (or `q dV`) by adaptive quadrature over the chart.
///
/// `omega` and `eta` map an ambient point to coefficients in multi-index order.
pub fn oracle_global_inner_product(
    manifold: &Manifold,
    omega: &dyn Fn(&[f64]) -> Vec<f64>,
    eta: &dyn Fn(&[f64]) -> Vec<f64>,
    degree: usize,
    weighting: Weighting,
) -> Result<f64> {
    let table = multi_index_table(manifold.ambient_dim(), degree)?;
    let b = table.len();
    let integrand = |u: &[f64]| -> Result<f64> {
        let g = oracle_gram_k(manifold, u, degree)?;
        let p = manifold.embed(u);
        let (f, h) = (omega(&p), eta(&p));
        if f.len() != b || h.len() != b {
            return Err(NpfError::ShapeMismatch(format!("forms need {b} coefficients")));
        }
        let mut acc = 0.0;
        for i in 0..b {
            for j in 0..b {
                acc += f[i] * g[[i, j]] * h[j];
            }
        }
        let mut w = manifold.volume_element(u);
        if weighting == Weighting::Density {
            w *= manifold.density(u);
        }
        Ok(acc * w)
    };
    integrate_box(&integrand, &manifold.domain(), 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use ndarray::array;

    fn all_manifolds() -> Vec<Manifold> {
        vec![
            Manifold::Circle,
            Manifold::VonMisesCircle { kappa: 3.0, mu: 1.0 },
            Manifold::diagonal_line(),
            Manifold::Sphere,
            Manifold::FlatTorus,
        ]
    }

    fn random_param(m: &Manifold, rng: &mut impl Rng) -> Vec<f64> {
        m.domain().iter().map(|&(a, b)| rng.random_range(a..b)).collect()
    }

    #[test]
    fn frames_are_orthonormal_and_projectors_idempotent() {
        let mut rng = crate::rng::stream(0, "oracle-test", 0);
        for m in all_manifolds() {
            for _ in 0..20 {
                let u = random_param(&m, &mut rng);
                let frame = m.tangent_frame(&u);
                for (a, ta) in frame.iter().enumerate() {
                    for (b, tb) in frame.iter().enumerate() {
                        let dot: f64 = ta.iter().zip(tb).map(|(x, y)| x * y).sum();
                        assert!((dot - f64::from(u8::from(a == b))).abs() <= 1e-12);
                    }
                }
                let pi = oracle_gram_1(&m, &u).unwrap();
                assert!((&pi.dot(&pi) - &pi).iter().all(|v| v.abs() <= 1e-12));
                assert!((&pi - &pi.t()).iter().all(|v| *v == 0.0));
                assert!((pi.diag().sum() - m.intrinsic_dim() as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for m in all_manifolds() {
            let total = integrate_box(&|u: &[f64]| Ok(m.density(u) * m.volume_element(u)), &m.domain(), 1e-12).unwrap();
            assert!((total - 1.0).abs() <= 1e-6, "{}: {total}", m.name());
        }
    }

    #[test]
    fn known_projectors() {
        let c = oracle_gram_1(&Manifold::Circle, &[PI / 2.0]).unwrap();
        assert!((&c - &array![[1.0, 0.0], [0.0, 0.0]]).iter().all(|v| v.abs() < 1e-15));
        let l = oracle_gram_1(&Manifold::diagonal_line(), &[0.3]).unwrap();
        assert!((&l - &array![[0.5, 0.5], [0.5, 0.5]]).iter().all(|v| v.abs() < 1e-15));
        let s2 = oracle_gram_k(&Manifold::Sphere, &[0.0, 0.7], 2).unwrap();
        assert!((&s2 - &array![[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).iter().all(|v| v.abs() < 1e-15));
        let c2 = oracle_gram_k(&Manifold::Circle, &[1.0], 2).unwrap();
        assert_eq!(c2.dim(), (1, 1));
        assert!(c2[[0, 0]].abs() < 1e-15);
        assert!(oracle_gram_1(&Manifold::Circle, &[7.0]).is_err());
        assert!(oracle_gram_k(&Manifold::Circle, &[1.0], 3).is_err());
    }

    #[test]
    fn sphere_projector_is_identity_minus_normal() {
        let mut rng = crate::rng::stream(1, "oracle-test", 0);
        for _ in 0..10 {
            let u = random_param(&Manifold::Sphere, &mut rng);
            let p = Manifold::Sphere.embed(&u);
            let pi = oracle_gram_1(&Manifold::Sphere, &u).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let want = f64::from(u8::from(i == j)) - p[i] * p[j];
                    assert!((pi[[i, j]] - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn compound_oracle_spectrum_and_trace() {
        let mut rng = crate::rng::stream(2, "oracle-test", 0);
        for m in [Manifold::Sphere, Manifold::FlatTorus] {
            for degree in 1..=m.ambient_dim() {
                let u = random_param(&m, &mut rng);
                let g = oracle_gram_k(&m, &u, degree).unwrap();
                let b = g.nrows();
                let eig = SymmetricEigen::new(DMatrix::from_fn(b, b, |i, j| g[[i, j]])).eigenvalues;
                assert!(eig.iter().all(|&e| e.abs() <= 1e-10 || (e - 1.0).abs() <= 1e-10));
                let trace = g.diag().sum();
                let want = crate::binomial(m.intrinsic_dim(), degree) as f64;
                assert!((trace - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn oracle_field_matches_compound_of_oracle_g1() {
        let s = Manifold::FlatTorus.sample(30, 4);
        let g1 = oracle_gram_field(&Manifold::FlatTorus, &s.params, 1).unwrap();
        let g2 = oracle_gram_field(&Manifold::FlatTorus, &s.params, 2).unwrap();
        let lifted = crate::gram::compound_gram_field(&g1, 2).unwrap();
        assert!((lifted.values() - g2.values()).iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn circle_inner_products() {
        let dx = |_: &[f64]| vec![1.0, 0.0];
        let dy = |_: &[f64]| vec![0.0, 1.0];
        let vol = oracle_global_inner_product(&Manifold::Circle, &dx, &dx, 1, Weighting::Volume).unwrap();
        assert!((vol - PI).abs() <= 1e-8 * PI);
        let cross = oracle_global_inner_product(&Manifold::Circle, &dx, &dy, 1, Weighting::Volume).unwrap();
        assert!(cross.abs() <= 1e-8);
        let dens = oracle_global_inner_product(&Manifold::Circle, &dx, &dx, 1, Weighting::Density).unwrap();
        assert!((dens - 0.5).abs() <= 1e-8 * 0.5);
        let area = oracle_global_inner_product(&Manifold::Sphere, &|_| vec![1.0, 0.0, 0.0], &|_| vec![1.0, 0.0, 0.0], 2, Weighting::Volume)
            .unwrap();
        // dx∧dy pairs with itself to z²
        assert!((area - 4.0 * PI / 3.0).abs() <= 1e-7);
    }

    #[test]
    fn samples_lie_on_manifold() {
        for m in all_manifolds() {
            let s = m.sample(200, 9);
            assert_eq!(s.points.dim(), (200, m.ambient_dim()));
            for (row, u) in s.points.rows().into_iter().zip(&s.params) {
                m.check_domain(u).unwrap();
                let p = m.embed(u);
                assert!(row.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-15));
            }
            assert_eq!(m.sample(200, 9).points, s.points);
        }
        assert_eq!(Manifold::from_name("von-mises:4").unwrap(), Manifold::VonMisesCircle { kappa: 4.0, mu: 0.0 });
        assert!(Manifold::from_name("klein").is_err());
    }
}
