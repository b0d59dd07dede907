//! Full-batch Adam training, stratified splits and AUROC.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::comparison::ReadoutKind;
use super::model::{loss_and_grad, Example, FormModel, ModelSpec};
use crate::data::measure::MeasureMode;
use crate::error::{NpfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Clouds per step; absent means full batch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub split_seed: u64,
    pub ell: usize,
    pub degree: usize,
    pub hidden: Vec<usize>,
    pub readout: ReadoutKind,
    pub optimizer: Optimizer,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    pub measure: MeasureMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-3,
            batch_size: None,
            seed: 0,
            split_seed: 0,
            ell: 8,
            degree: 1,
            hidden: vec![32, 32],
            readout: ReadoutKind::Tri,
            optimizer: Optimizer::Adam,
            validation_fraction: 0.2,
            test_fraction: 0.2,
            measure: MeasureMode::Uniform,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.ell == 0 || self.degree == 0 || self.batch_size == Some(0) {
            return Err(NpfError::Config("epochs, ell, degree and batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NpfError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        let (v, t) = (self.validation_fraction, self.test_fraction);
        if !(v > 0.0 && t > 0.0 && v + t < 1.0) {
            return Err(NpfError::Config(format!("split fractions must be positive and sum below 1, got {v} and {t}")));
        }
        Ok(())
    }

    pub fn model_spec(&self, input_dim: usize) -> ModelSpec {
        ModelSpec { input_dim, hidden: self.hidden.clone(), ell: self.ell, degree: self.degree, readout: self.readout }
    }
}

/// Adam with the usual defaults `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e−8`.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self { lr, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = B1 * *m + (1.0 - B1) * g;
            *v = B2 * *v + (1.0 - B2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + 1e-8);
        }
    }
}

/// Cloud indices per fold, each in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Split stratified by label; each class is shuffled with its own stream.
pub fn stratified_split(labels: &[bool], validation_fraction: f64, test_fraction: f64, seed: u64) -> Splits {
    let mut s = Splits { train: Vec::new(), validation: Vec::new(), test: Vec::new() };
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut crate::rng::stream(seed, "split", u64::from(class)));
        let n = idx.len();
        let n_test = (test_fraction * n as f64).round() as usize;
        let n_val = (validation_fraction * n as f64).round() as usize;
        s.test.extend_from_slice(&idx[..n_test]);
        s.validation.extend_from_slice(&idx[n_test..n_test + n_val]);
        s.train.extend_from_slice(&idx[n_test + n_val..]);
    }
    s.train.sort_unstable();
    s.validation.sort_unstable();
    s.test.sort_unstable();
    s
}

/// Probability that a random positive outscores a random negative; ties count ½.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(NpfError::LengthMismatch { expected: labels.len(), got: scores.len() });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(NpfError::UndefinedMetric("AUROC needs both classes".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(NpfError::UndefinedMetric("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks over tied groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean loss over training clouds at the parameters before the epoch's updates.
    pub train_loss: f64,
    pub validation_loss: f64,
    pub validation_auroc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: FormModel,
    pub history: Vec<EpochRecord>,
    pub splits: Splits,
    pub test_scores: Vec<f64>,
    pub test_auroc: f64,
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,validation_loss,validation_auroc\n");
    for r in history {
        let _ = writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, r.validation_loss, r.validation_auroc);
    }
    out
}

fn round_to_f32(params: &mut [f64]) {
    for p in params {
        *p = f64::from(*p as f32);
    }
}

pub fn scores(model: &FormModel, examples: &[Example<'_>]) -> Result<Vec<f64>> {
    examples.iter().map(|ex| model.logit(ex)).collect()
}

fn evaluate(model: &FormModel, examples: &[Example<'_>]) -> Result<(f64, f64)> {
    let s = scores(model, examples)?;
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    let loss = s.iter().zip(&labels).map(|(&z, &l)| super::model::bce_with_logit(z, l)).sum::<f64>() / s.len() as f64;
    Ok((loss, auroc(&s, &labels)?))
}

/// Trains on the train fold, tracks the validation fold, scores the test fold.
///
/// Parameters are held on the fp32 grid: they are rounded after
/// initialisation and after every optimiser step.
pub fn train(examples: &[Example<'_>], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let first = examples.first().ok_or_else(|| NpfError::Config("empty dataset".into()))?;
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    let splits = stratified_split(&labels, config.validation_fraction, config.test_fraction, config.split_seed);
    let pick = |idx: &[usize]| idx.iter().map(|&i| examples[i]).collect::<Vec<_>>();
    let (train_set, val_set, test_set) = (pick(&splits.train), pick(&splits.validation), pick(&splits.test));

    let mut model = FormModel::new(&config.model_spec(first.points.ncols()))?;
    model.init_uniform(&mut crate::rng::stream(config.seed, "init", 0));
    let mut theta = model.params();
    round_to_f32(&mut theta);
    model.set_params(&theta)?;
    let mut adam = Adam::new(theta.len(), config.learning_rate);

    let batch = config.batch_size.unwrap_or(train_set.len()).min(train_set.len());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        if batch < train_set.len() {
            order.sort_unstable();
            order.shuffle(&mut crate::rng::stream(config.seed, "batch", epoch as u64));
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let batch_examples: Vec<Example<'_>> = chunk.iter().map(|&i| train_set[i]).collect();
            let (loss, grad) = loss_and_grad(&model, &batch_examples)?;
            epoch_loss += loss;
            adam.step(&mut theta, &grad);
            round_to_f32(&mut theta);
            model.set_params(&theta)?;
        }
        let (validation_loss, validation_auroc) = evaluate(&model, &val_set)?;
        history.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / train_set.len() as f64,
            validation_loss,
            validation_auroc,
        });
    }
    let test_scores = scores(&model, &test_set)?;
    let test_labels: Vec<bool> = test_set.iter().map(|e| e.label).collect();
    let test_auroc = auroc(&test_scores, &test_labels)?;
    Ok(TrainOutcome { model, history, splits, test_scores, test_auroc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auroc_values() {
        assert_eq!(auroc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
        assert_eq!(auroc(&[0.3; 6], &[false, true, false, true, true, false]).unwrap(), 0.5);
        assert!(matches!(auroc(&[0.1, 0.2], &[true, true]), Err(NpfError::UndefinedMetric(_))));
    }

    #[test]
    fn auroc_matches_pair_counting() {
        let mut rng = crate::rng::stream(5, "auroc", 0);
        use rand::Rng;
        for _ in 0..50 {
            let n = rng.random_range(2..30);
            let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..6u8))).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            labels[0] = true;
            labels[1] = false;
            let mut wins = 0.0;
            let mut pairs = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] && !labels[j] {
                        pairs += 1.0;
                        wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                    }
                }
            }
            assert!((auroc(&scores, &labels).unwrap() - wins / pairs).abs() < 1e-12);
        }
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let labels: Vec<bool> = (0..100).map(|i| i % 4 == 0).collect();
        let s = stratified_split(&labels, 0.2, 0.2, 0);
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (60, 20, 20));
        assert_eq!(s.test.iter().filter(|&&i| labels[i]).count(), 5);
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(stratified_split(&labels, 0.2, 0.2, 0), s);
        assert_ne!(stratified_split(&labels, 0.2, 0.2, 1), s);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut adam = Adam::new(2, 0.1);
        let mut p = vec![1.0, -1.0];
        adam.step(&mut p, &[3.0, -0.5]);
        assert!((p[0] - 0.9).abs() < 1e-8 && (p[1] + 0.9).abs() < 1e-8);
    }

    #[test]
    fn config_toml_roundtrip_and_validation() {
        let cfg = TrainConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<TrainConfig>(&text).unwrap(), cfg);
        let partial: TrainConfig = toml::from_str("epochs = 5\nreadout = \"diag\"").unwrap();
        assert_eq!((partial.epochs, partial.readout, partial.ell), (5, ReadoutKind::Diag, 8));
        assert!(TrainConfig { validation_fraction: 0.6, test_fraction: 0.5, ..cfg.clone() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..cfg }.validate().is_err());
    }
}
