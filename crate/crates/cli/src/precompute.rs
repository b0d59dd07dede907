use std::fs;

use anyhow::{Context, Result};
use ndarray::Array2;
use npf_core::data::dataset::{write_points_csv, Manifest};
use npf_core::gram::estimate_gram_memory;
use npf_core::laplacian::IntrinsicDim;
use npf_core::pipeline::precompute_cloud;
use npf_core::{load_dataset, multi_index_table, write_gram_cache, NpfError, Precision};
use rayon::prelude::*;

use crate::args::PrecomputeArgs;
use crate::echo::{to_table, write_echo};
use crate::inputs::{cache_path, dataset_dir, dataset_hash, density_path, manifest_path};
use crate::UsageError;

/// `None` means "take it from the manifest".
fn parse_dim(flag: &str) -> Result<Option<IntrinsicDim>> {
    match flag {
        "auto" => Ok(Some(IntrinsicDim::Estimate)),
        "meta" => Ok(None),
        n => match n.parse::<usize>() {
            Ok(d) if d > 0 => Ok(Some(IntrinsicDim::Known(d))),
            _ => Err(UsageError(format!("--dim must be a positive integer, `auto` or `meta`, got {n:?}")).into()),
        },
    }
}

fn meta_dim(meta: &toml::Table) -> IntrinsicDim {
    match meta.get("intrinsic_dim").and_then(toml::Value::as_integer) {
        Some(d) if d > 0 => IntrinsicDim::Known(d as usize),
        _ => IntrinsicDim::Estimate,
    }
}

pub fn run(args: &PrecomputeArgs) -> Result<()> {
    let dim_flag = parse_dim(&args.dim)?;
    let mut params = args.laplacian.params(IntrinsicDim::Estimate);
    params.validate()?;
    let manifest_file = manifest_path(&args.dataset);
    let manifest = Manifest::read(&manifest_file).with_context(|| format!("reading {}", manifest_file.display()))?;
    let clouds = load_dataset(&manifest_file)?;
    let dim = dim_flag.unwrap_or_else(|| meta_dim(&manifest.meta));
    params.dim = dim;
    if let Some(c) = clouds.first() {
        multi_index_table(c.dim(), args.k)?;
    }
    let precision: Precision = args.precision.into();
    let out = args.out.clone().unwrap_or_else(|| dataset_dir(&manifest_file).join("gram"));
    fs::create_dir_all(&out)?;

    let results: Vec<Result<(u64, u64), NpfError>> = clouds
        .par_iter()
        .map(|c| {
            let pre = precompute_cloud(c, &params, args.k)?;
            let file_bytes = write_gram_cache(cache_path(&out, &c.id), &pre.gram, precision)?;
            let q = Array2::from_shape_vec((pre.density.len(), 1), pre.density).expect("column shape");
            write_points_csv(density_path(&out, &c.id), &q)?;
            let payload = (pre.gram.values().len() * precision.width()) as u64;
            Ok((payload, file_bytes))
        })
        .collect();

    let (mut payload, mut on_disk, mut estimate) = (0u64, 0u64, 0u64);
    let mut failures = Vec::new();
    for (c, r) in clouds.iter().zip(results) {
        match r {
            Ok((p, f)) => {
                payload += p;
                on_disk += f;
                estimate += estimate_gram_memory(c.len() as u64, c.dim(), args.k, precision)?.bytes;
            }
            Err(e) => {
                eprintln!("failed {}: {e}", c.id);
                failures.push(NpfError::Cloud { id: c.id.clone(), source: Box::new(e) });
            }
        }
    }
    let done = clouds.len() - failures.len();
    println!(
        "precomputed {done}/{} clouds (k={}) into {}: gram payload {payload} B, estimate {estimate} B, on disk {on_disk} B",
        clouds.len(),
        args.k,
        out.display()
    );

    let mut config = toml::Table::new();
    config.insert("degree".into(), (args.k as i64).into());
    config.insert("precision".into(), format!("{precision:?}").to_lowercase().into());
    config.insert("laplacian".into(), to_table(&params)?.into());
    let mut inputs = toml::Table::new();
    inputs.insert("dataset".into(), manifest_file.display().to_string().into());
    inputs.insert("dataset_sha256".into(), dataset_hash(&manifest_file)?.into());
    write_echo(&out, "precompute", config, inputs)?;

    match failures.into_iter().next() {
        None => Ok(()),
        Some(first) => Err(anyhow::Error::new(first).context(format!("{} of {} clouds failed", clouds.len() - done, clouds.len()))),
    }
}
