use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use npf_core::forms::checkpoint::{load_checkpoint, save_checkpoint};
use npf_core::forms::model::Example;
use npf_core::forms::train::{history_csv, scores, stratified_split, train};
use npf_core::pipeline::binary_label;
use npf_core::{auroc, measure_weights, Measure, NpfError, TrainConfig};

use crate::args::{EvalArgs, TrainArgs};
use crate::echo::{hash_files, to_table, write_echo};
use crate::inputs::Loaded;
use crate::UsageError;

fn train_config(args: &TrainArgs, degree: usize) -> Result<TrainConfig> {
    let mut cfg: TrainConfig = match &args.config {
        None => TrainConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(v) = args.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = args.lr {
        cfg.learning_rate = v;
    }
    if args.batch_size.is_some() {
        cfg.batch_size = args.batch_size;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.split_seed {
        cfg.split_seed = v;
    }
    if let Some(v) = args.ell {
        cfg.ell = v;
    }
    if let Some(v) = &args.hidden {
        cfg.hidden = v.clone();
    }
    if let Some(v) = args.readout {
        cfg.readout = v.into();
    }
    if let Some(v) = args.measure {
        cfg.measure = v.into();
    }
    // The form degree is fixed by the caches.
    cfg.degree = degree;
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(cfg)
}

fn measures(data: &Loaded, cfg: &TrainConfig) -> Result<Vec<Measure>> {
    if cfg.measure == npf_core::MeasureMode::Uniform {
        return Ok(data.clouds.iter().map(|c| Measure::uniform(c.len())).collect());
    }
    let q = data.densities()?;
    Ok(data
        .clouds
        .iter()
        .zip(&q)
        .map(|(c, q)| measure_weights(c.len(), Some(q), cfg.measure))
        .collect::<Result<Vec<_>, NpfError>>()?)
}

fn examples<'a>(data: &'a Loaded, mu: &'a [Measure]) -> Result<Vec<Example<'a>>> {
    Ok(npf_core::pipeline::examples(&data.clouds, &data.grams, mu)?)
}

fn scores_csv(ex: &[Example<'_>], idx: &[usize], scores: &[f64]) -> String {
    let mut out = String::from("id,label,score\n");
    for (&i, s) in idx.iter().zip(scores) {
        let _ = writeln!(out, "{},{},{s:?}", ex[i].id, u8::from(ex[i].label));
    }
    out
}

fn metrics_toml(auc: f64, train: usize, validation: usize, test: usize) -> String {
    let mut t = toml::Table::new();
    t.insert("test_auroc".into(), auc.into());
    t.insert("train_clouds".into(), (train as i64).into());
    t.insert("validation_clouds".into(), (validation as i64).into());
    t.insert("test_clouds".into(), (test as i64).into());
    toml::to_string(&t).expect("plain table")
}

fn inputs_table(data: &Loaded) -> toml::Table {
    let mut inputs = toml::Table::new();
    inputs.insert("dataset".into(), data.manifest.display().to_string().into());
    inputs.insert("dataset_sha256".into(), data.dataset_sha256.clone().into());
    inputs.insert("caches".into(), data.cache_dir.display().to_string().into());
    inputs.insert("caches_sha256".into(), data.caches_sha256.clone().into());
    inputs
}

pub fn run_train(args: &TrainArgs) -> Result<()> {
    let data = Loaded::load(&args.data)?;
    let cfg = train_config(args, data.degree())?;
    let mu = measures(&data, &cfg)?;
    let ex = examples(&data, &mu)?;
    eprintln!("training on {} clouds (k={}, readout {})", ex.len(), cfg.degree, cfg.readout.name());
    let outcome = train(&ex, &cfg)?;

    let out = &args.out;
    fs::create_dir_all(out)?;
    save_checkpoint(out.join("checkpoint.npfm"), &outcome.model, Some(&cfg))?;
    fs::write(out.join("history.csv"), history_csv(&outcome.history))?;
    fs::write(out.join("test_scores.csv"), scores_csv(&ex, &outcome.splits.test, &outcome.test_scores))?;
    let s = &outcome.splits;
    fs::write(out.join("metrics.toml"), metrics_toml(outcome.test_auroc, s.train.len(), s.validation.len(), s.test.len()))?;
    write_echo(out, "train", to_table(&cfg)?, inputs_table(&data))?;
    println!("test AUROC {:.6}", outcome.test_auroc);
    Ok(())
}

pub fn run_eval(args: &EvalArgs) -> Result<()> {
    let (model, header) = load_checkpoint(&args.checkpoint)?;
    let data = Loaded::load(&args.data)?;
    let spec = model.spec();
    if spec.degree != data.degree() || spec.input_dim != data.clouds[0].dim() {
        return Err(NpfError::CacheFormat(format!(
            "checkpoint expects D={}, k={}; data has D={}, k={}",
            spec.input_dim,
            spec.degree,
            data.clouds[0].dim(),
            data.degree()
        ))
        .into());
    }
    let cfg = header.train.clone().unwrap_or_default();
    let mu = measures(&data, &cfg)?;
    let ex = examples(&data, &mu)?;
    let labels = data.clouds.iter().map(binary_label).collect::<Result<Vec<_>, _>>()?;
    let splits = stratified_split(&labels, cfg.validation_fraction, cfg.test_fraction, cfg.split_seed);
    let test: Vec<Example> = splits.test.iter().map(|&i| ex[i]).collect();
    let s = scores(&model, &test)?;
    let test_labels: Vec<bool> = test.iter().map(|e| e.label).collect();
    let auc = auroc(&s, &test_labels)?;

    let out = &args.out;
    fs::create_dir_all(out)?;
    fs::write(out.join("eval_scores.csv"), scores_csv(&ex, &splits.test, &s))?;
    fs::write(out.join("metrics.toml"), metrics_toml(auc, splits.train.len(), splits.validation.len(), splits.test.len()))?;
    let mut inputs = inputs_table(&data);
    let ckpt = args.checkpoint.as_path();
    inputs.insert("checkpoint".into(), ckpt.display().to_string().into());
    inputs.insert(
        "checkpoint_sha256".into(),
        hash_files(ckpt.parent().unwrap_or(Path::new(".")), &[ckpt.file_name().context("checkpoint path")?.into()])?
            .into(),
    );
    write_echo(out, "eval", to_table(&cfg)?, inputs)?;
    println!("test AUROC {auc:.6}");
    Ok(())
}
