//! Locating datasets and Gram caches on disk.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use npf_core::data::dataset::{read_points_csv, Manifest};
use npf_core::error::NpfError;
use npf_core::{load_dataset, read_gram_cache, GramField, PointCloud};

use crate::args::DataArgs;
use crate::echo::hash_files;

pub fn manifest_path(dataset: &Path) -> PathBuf {
    if dataset.is_dir() {
        dataset.join("manifest.toml")
    } else {
        dataset.to_path_buf()
    }
}

pub fn dataset_dir(manifest: &Path) -> PathBuf {
    manifest.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

pub fn default_cache_dir(manifest: &Path) -> PathBuf {
    dataset_dir(manifest).join("gram")
}

pub fn cache_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.gram"))
}

pub fn density_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.q0.csv"))
}

/// Hash of the manifest and every file it references.
pub fn dataset_hash(manifest_path: &Path) -> Result<String> {
    let manifest = Manifest::read(manifest_path)?;
    let mut files = vec![PathBuf::from(manifest_path.file_name().context("manifest has no file name")?)];
    for entry in &manifest.clouds {
        files.push(entry.path.clone());
        if let Some(d) = &entry.density_path {
            files.push(d.clone());
        }
    }
    hash_files(&dataset_dir(manifest_path), &files)
}

/// A dataset with its Gram caches loaded.
pub struct Loaded {
    pub manifest: PathBuf,
    pub cache_dir: PathBuf,
    pub clouds: Vec<PointCloud>,
    pub grams: Vec<GramField>,
    pub dataset_sha256: String,
    pub caches_sha256: String,
}

impl Loaded {
    pub fn load(args: &DataArgs) -> Result<Self> {
        let manifest = manifest_path(&args.dataset);
        let clouds = load_dataset(&manifest)?;
        if clouds.is_empty() {
            return Err(NpfError::Ingestion { path: manifest, reason: "dataset lists no clouds".into() }.into());
        }
        let cache_dir = args.caches.clone().unwrap_or_else(|| default_cache_dir(&manifest));
        let mut grams = Vec::with_capacity(clouds.len());
        let mut files = Vec::with_capacity(clouds.len());
        for c in &clouds {
            let path = cache_path(&cache_dir, &c.id);
            if !path.is_file() {
                return Err(NpfError::MissingCache { cloud: c.id.clone(), path }.into());
            }
            let g = read_gram_cache(&path)?;
            if g.len() != c.len() || g.dim() != c.dim() {
                return Err(NpfError::CacheFormat(format!(
                    "cache for {} has m={}, D={} but the cloud has m={}, D={}",
                    c.id,
                    g.len(),
                    g.dim(),
                    c.len(),
                    c.dim()
                ))
                .into());
            }
            if let Some(first) = grams.first().map(GramField::degree) {
                if g.degree() != first {
                    return Err(NpfError::CacheFormat(format!("cache for {} has k={}, others have k={first}", c.id, g.degree())).into());
                }
            }
            grams.push(g);
            files.push(PathBuf::from(format!("{}.gram", c.id)));
        }
        let caches_sha256 = hash_files(&cache_dir, &files)?;
        let dataset_sha256 = dataset_hash(&manifest)?;
        Ok(Self { manifest, cache_dir, clouds, grams, dataset_sha256, caches_sha256 })
    }

    pub fn degree(&self) -> usize {
        self.grams[0].degree()
    }

    /// Density per cloud for density-corrected measures: the true one if known, else the cached estimate.
    pub fn densities(&self) -> Result<Vec<Vec<f64>>> {
        self.clouds
            .iter()
            .map(|c| match &c.density {
                Some(q) => Ok(q.clone()),
                None => {
                    let path = density_path(&self.cache_dir, &c.id);
                    if !path.is_file() {
                        return Err(NpfError::MissingCache { cloud: c.id.clone(), path }.into());
                    }
                    Ok(read_points_csv(&path)?.iter().copied().collect())
                }
            })
            .collect()
    }
}
