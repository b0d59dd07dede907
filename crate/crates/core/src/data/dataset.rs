//! Dataset interchange: one headerless CSV per cloud plus a TOML manifest.
//!
//! ```toml
//! [meta]            # free-form config echo written by the generator
//! task = "circles-lines"
//!
//! [[cloud]]
//! id = "circles-lines-0000"
//! path = "circles-lines-0000.csv"
//! label = 1
//! split = "train"                      # optional
//! density_path = "x.density.csv"       # optional, one value per row
//! ```
//!
//! Paths are relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{NpfError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudEntry {
    pub id: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub meta: toml::Table,
    #[serde(default, rename = "cloud")]
    pub clouds: Vec<CloudEntry>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| ingestion(path, format!("manifest: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always serialisable")
    }
}

fn ingestion(path: &Path, reason: impl Into<String>) -> NpfError {
    NpfError::Ingestion { path: path.to_path_buf(), reason: reason.into() }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| ingestion(path, e.to_string()))?;
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ingestion(path, e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                let v: f64 = field
                    .parse()
                    .map_err(|_| ingestion(path, format!("row {r} col {c}: cannot parse {field:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ingestion(path, format!("row {r} col {c}: non-finite value {field:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a point CSV (one point per row).
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let dim = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().position(|row| row.len() != dim) {
        return Err(ingestion(path, format!("ragged row {r}: {} columns, expected {dim}", rows[r].len())));
    }
    let m = rows.len();
    Array2::from_shape_vec((m, dim), rows.into_iter().flatten().collect())
        .map_err(|e| ingestion(path, e.to_string()))
}

/// Writes points with the shortest round-trip float formatting.
pub fn write_points_csv(path: impl AsRef<Path>, points: &Array2<f64>) -> Result<()> {
    let mut text = String::with_capacity(points.len() * 20);
    for row in points.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Loads every cloud listed in a manifest, sorted by id.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Vec<PointCloud>> {
    let manifest_path = manifest_path.as_ref();
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut clouds = Vec::with_capacity(manifest.clouds.len());
    let mut dim: Option<usize> = None;
    for entry in &manifest.clouds {
        let path = base.join(&entry.path);
        let points = read_points_csv(&path)?;
        match dim {
            None => dim = Some(points.ncols()),
            Some(d) if d != points.ncols() => {
                return Err(ingestion(
                    &path,
                    format!("cloud {} has D={}, dataset has D={d}", entry.id, points.ncols()),
                ))
            }
            Some(_) => {}
        }
        let mut cloud = PointCloud::new(entry.id.clone(), points).map_err(|e| ingestion(&path, e.to_string()))?;
        cloud.label = entry.label;
        cloud.split = entry.split.clone();
        if let Some(dp) = &entry.density_path {
            let dp = base.join(dp);
            let q: Vec<f64> = read_rows(&dp)?.into_iter().flatten().collect();
            cloud = cloud.with_density(q).map_err(|e| ingestion(&dp, e.to_string()))?;
        }
        clouds.push(cloud);
    }
    clouds.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(clouds)
}

/// Writes `clouds` under `dir` as CSVs plus `manifest.toml`; returns the manifest path.
pub fn write_dataset(dir: impl AsRef<Path>, clouds: &[PointCloud], meta: toml::Table) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest { meta, clouds: Vec::with_capacity(clouds.len()) };
    for cloud in clouds {
        let file = PathBuf::from(format!("{}.csv", cloud.id));
        write_points_csv(dir.join(&file), &cloud.points)?;
        let density_path = match &cloud.density {
            Some(q) => {
                let file = PathBuf::from(format!("{}.density.csv", cloud.id));
                let text: String = q.iter().map(|v| format!("{v:?}\n")).collect();
                fs::write(dir.join(&file), text)?;
                Some(file)
            }
            None => None,
        };
        manifest.clouds.push(CloudEntry {
            id: cloud.id.clone(),
            path: file,
            label: cloud.label,
            split: cloud.split.clone(),
            density_path,
        });
    }
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest.to_toml())?;
    Ok(path)
}
