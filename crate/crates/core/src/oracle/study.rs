//! Empirical consistency studies against the analytic oracles.

use std::f64::consts::PI;
use std::fmt::Write as _;

use ndarray::Array2;

use super::{oracle_gram_field, oracle_global_inner_product, Manifold, Weighting};
use crate::data::measure::{measure_weights, MeasureMode};
use crate::error::{NpfError, Result};
use crate::gram::{compound_gram_field, evaluate_form, global_inner_product, gram_field_1};
use crate::laplacian::{build_laplacian, Graph, IntrinsicDim, LaplacianParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    Fixed(f64),
    /// `ε_n = n^{-ϑ}`.
    Coupled { theta: f64 },
}

impl EpsilonSchedule {
    pub fn epsilon(&self, n: usize) -> f64 {
        match *self {
            EpsilonSchedule::Fixed(e) => e,
            EpsilonSchedule::Coupled { theta } => (n as f64).powf(-theta),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub manifold: Manifold,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub params: LaplacianParams,
    pub epsilon: EpsilonSchedule,
    pub degree: usize,
}

impl StudyConfig {
    /// Full graph, known intrinsic dimension, `ε = 1`, order-1 field, 5 seeds.
    pub fn new(manifold: Manifold) -> Self {
        Self {
            manifold,
            sizes: vec![250, 500, 1000, 2000],
            seeds: (0..5).collect(),
            params: LaplacianParams {
                graph: Graph::Full,
                dim: IntrinsicDim::Known(manifold.intrinsic_dim()),
                ..Default::default()
            },
            epsilon: EpsilonSchedule::Fixed(1.0),
            degree: 1,
        }
    }

    fn validate(&self) -> Result<Vec<String>> {
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NpfError::InvalidParams("sizes must be nonempty and strictly increasing".into()));
        }
        if self.seeds.is_empty() {
            return Err(NpfError::InvalidParams("at least one seed is required".into()));
        }
        let mut warnings = Vec::new();
        if self.seeds.len() < 3 {
            warnings.push(format!("only {} seed(s); medians over seeds have low statistical power", self.seeds.len()));
        }
        if let EpsilonSchedule::Coupled { theta } = self.epsilon {
            let d = self.manifold.intrinsic_dim() as f64;
            let upper = 2.0 / (d + 8.0);
            if !(theta > 0.0 && theta < upper) {
                warnings.push(format!("theta = {theta} is outside (0, {upper:.4}); convergence is not guaranteed"));
            }
        }
        Ok(warnings)
    }
}

/// One CSV record: `manifold, n, epsilon, alpha, beta, seed, metric, value`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub manifold: String,
    pub n: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub warnings: Vec<String>,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl StudyReport {
    /// Median over seeds of `metric`, per sample size, in increasing `n`.
    pub fn median_over_seeds(&self, metric: &str) -> Vec<(usize, f64)> {
        let mut sizes: Vec<usize> = self.rows.iter().filter(|r| r.metric == metric).map(|r| r.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
            .into_iter()
            .map(|n| {
                let mut v: Vec<f64> = self.rows.iter().filter(|r| r.metric == metric && r.n == n).map(|r| r.value).collect();
                (n, median(&mut v))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("manifold,n,epsilon,alpha,beta,seed,metric,value\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{},{},{}", r.manifold, r.n, r.epsilon, r.alpha, r.beta, r.seed, r.metric, r.value);
        }
        out
    }
}

/// Per-point max-abs error of the estimated order-k field against the oracle.
///
/// Metrics per `(n, seed)`: `median_err` and `max_err` over evaluated points,
/// `min_eigenvalue` of the estimated slices. On the segment only the middle 60%
/// is evaluated and `boundary_median_err` reports the rest.
pub fn convergence_study(config: &StudyConfig) -> Result<StudyReport> {
    let warnings = config.validate()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut report = StudyReport { rows: Vec::new(), warnings };
    for &n in &config.sizes {
        let epsilon = config.epsilon.epsilon(n);
        let params = LaplacianParams { epsilon, ..config.params };
        for &seed in &config.seeds {
            let sample = config.manifold.sample(n, seed);
            let op = build_laplacian(sample.points.view(), &params)?;
            let g1 = gram_field_1(&op, sample.points.view())?;
            let est = compound_gram_field(&g1, config.degree)?;
            let oracle = oracle_gram_field(&config.manifold, &sample.params, config.degree)?;
            let errors: Vec<f64> = (0..n)
                .map(|p| (&est.slice(p) - &oracle.slice(p)).iter().fold(0.0f64, |a, v| a.max(v.abs())))
                .collect();
            let (mut inner, mut boundary): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
            match config.manifold {
                Manifold::Segment { half_length, .. } => {
                    for (e, u) in errors.iter().zip(&sample.params) {
                        if u[0].abs() <= 0.6 * half_length {
                            inner.push(*e);
                        } else {
                            boundary.push(*e);
                        }
                    }
                }
                _ => inner = errors,
            }
            let mut push = |metric: &str, value: f64| {
                report.rows.push(StudyRow {
                    manifold: config.manifold.name(),
                    n,
                    epsilon,
                    alpha: params.alpha,
                    beta: params.beta,
                    seed,
                    metric: metric.into(),
                    value,
                })
            };
            push("max_err", inner.iter().copied().fold(0.0, f64::max));
            push("median_err", median(&mut inner));
            if !boundary.is_empty() {
                push("boundary_median_err", median(&mut boundary));
            }
            push("min_eigenvalue", est.min_eigenvalue());
        }
    }
    Ok(report)
}

/// Which density the corrected measure divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    /// Closed-form sampling density.
    True,
    /// Kernel estimate `q0` from the Laplacian construction.
    Estimated,
}

/// Corrected-versus-uncorrected inner products on von Mises circles.
#[derive(Debug, Clone)]
pub struct DensityCheck {
    pub kappas: Vec<f64>,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub params: LaplacianParams,
    pub source: DensitySource,
}

impl Default for DensityCheck {
    fn default() -> Self {
        Self {
            kappas: vec![0.0, 2.0, 4.0, 8.0],
            n: 512,
            seeds: (0..10).collect(),
            params: LaplacianParams { graph: Graph::Full, dim: IntrinsicDim::Known(1), ..Default::default() },
            source: DensitySource::True,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub kappa: f64,
    pub seed: u64,
    pub target: f64,
    pub corrected: f64,
    pub uncorrected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySummary {
    pub kappa: f64,
    pub target: f64,
    pub corrected_mae: f64,
    pub uncorrected_mae: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
    pub summary: Vec<DensitySummary>,
    pub warnings: Vec<String>,
}

impl DensityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kappa,seed,target,corrected,uncorrected\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.kappa, r.seed, r.target, r.corrected, r.uncorrected);
        }
        out
    }
}

/// `ω = dx`.
pub fn check_form_omega(_: &[f64]) -> Vec<f64> {
    vec![1.0, 0.0]
}

/// `η = dx + x dy`.
pub fn check_form_eta(p: &[f64]) -> Vec<f64> {
    vec![1.0, p[0]]
}

/// MAE of both estimators of `⟨⟨ι*ω, ι*η⟩⟩` against the volume-weighted oracle.
pub fn density_check(config: &DensityCheck) -> Result<DensityReport> {
    if config.kappas.is_empty() {
        return Err(NpfError::InvalidParams("at least one kappa is required".into()));
    }
    if config.seeds.is_empty() {
        return Err(NpfError::InvalidParams("at least one seed is required".into()));
    }
    let mut report = DensityReport::default();
    if config.seeds.len() == 1 {
        report.warnings.push("single seed: MAE has low statistical power".into());
    }
    for &kappa in &config.kappas {
        let manifold = Manifold::VonMisesCircle { kappa, mu: 0.0 };
        let target = oracle_global_inner_product(&manifold, &check_form_omega, &check_form_eta, 1, Weighting::Volume)?;
        let (mut corrected_abs, mut uncorrected_abs) = (0.0, 0.0);
        for &seed in &config.seeds {
            let sample = manifold.sample(config.n, seed);
            let op = build_laplacian(sample.points.view(), &config.params)?;
            let g1 = gram_field_1(&op, sample.points.view())?;
            let f: Array2<f64> = evaluate_form(sample.points.view(), 2, check_form_omega)?;
            let h: Array2<f64> = evaluate_form(sample.points.view(), 2, check_form_eta)?;
            let q = match config.source {
                DensitySource::True => sample.density.clone(),
                DensitySource::Estimated => op.density.q0.clone(),
            };
            let mu_c = measure_weights(config.n, Some(&q), MeasureMode::DensityCorrected)?;
            let mu_u = measure_weights(config.n, None, MeasureMode::Uniform)?;
            let corrected = global_inner_product(&g1, f.view(), h.view(), &mu_c)?;
            let uncorrected = global_inner_product(&g1, f.view(), h.view(), &mu_u)?;
            corrected_abs += (corrected - target).abs();
            uncorrected_abs += (uncorrected - target).abs();
            report.rows.push(DensityRow { kappa, seed, target, corrected, uncorrected });
        }
        let s = config.seeds.len() as f64;
        report.summary.push(DensitySummary {
            kappa,
            target,
            corrected_mae: corrected_abs / s,
            uncorrected_mae: uncorrected_abs / s,
        });
    }
    Ok(report)
}

/// Closed form of the check target, `∫ sin²θ − sinθ cos²θ dθ = π`.
pub const CHECK_TARGET: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_and_warnings() {
        assert_eq!(EpsilonSchedule::Coupled { theta: 0.5 }.epsilon(100), 0.1);
        let mut cfg = StudyConfig::new(Manifold::Circle);
        cfg.sizes = vec![60, 120];
        cfg.seeds = vec![0, 1, 2];
        cfg.epsilon = EpsilonSchedule::Coupled { theta: 0.5 };
        let report = convergence_study(&cfg).unwrap();
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("outside"));
        cfg.epsilon = EpsilonSchedule::Coupled { theta: 0.1 };
        assert!(convergence_study(&cfg).unwrap().warnings.is_empty());
        cfg.sizes = vec![120, 60];
        assert!(convergence_study(&cfg).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut cfg = StudyConfig::new(Manifold::Circle);
        cfg.sizes = vec![50];
        cfg.seeds = vec![4];
        let report = convergence_study(&cfg).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("manifold,n,epsilon,alpha,beta,seed,metric,value"));
        assert!(lines.next().unwrap().starts_with("circle,50,1,0,-0.5,4,"));
        assert_eq!(report.median_over_seeds("median_err").len(), 1);
        assert!(report.warnings[0].contains("low statistical power"));
    }

    #[test]
    fn segment_reports_boundary() {
        let mut cfg = StudyConfig::new(Manifold::diagonal_line());
        cfg.sizes = vec![1000];
        cfg.seeds = vec![0, 1, 2];
        let report = convergence_study(&cfg).unwrap();
        let inner = report.median_over_seeds("median_err")[0].1;
        let boundary = report.median_over_seeds("boundary_median_err")[0].1;
        assert!(inner.is_finite() && boundary.is_finite());
    }

    #[test]
    fn check_target_matches_quadrature() {
        for kappa in [0.0, 8.0] {
            let m = Manifold::VonMisesCircle { kappa, mu: 0.0 };
            let t = oracle_global_inner_product(&m, &check_form_omega, &check_form_eta, 1, Weighting::Volume).unwrap();
            assert!((t - CHECK_TARGET).abs() < 1e-8);
        }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
