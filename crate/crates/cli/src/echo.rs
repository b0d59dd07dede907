//! Config echo and input hashing written next to every output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// SHA-256 over `(relative path, length, bytes)` of each file, in the given order.
pub fn hash_files(base: &Path, files: &[PathBuf]) -> Result<String> {
    let mut hasher = Sha256::new();
    for rel in files {
        let bytes = fs::read(base.join(rel)).with_context(|| format!("hashing {}", base.join(rel).display()))?;
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0u8]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `run.toml`: the command, the resolved config and the input hashes.
pub fn write_echo(dir: &Path, command: &str, config: toml::Table, inputs: toml::Table) -> Result<()> {
    let mut run = toml::Table::new();
    run.insert("command".into(), command.into());
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    let mut doc = toml::Table::new();
    doc.insert("run".into(), run.into());
    doc.insert("inputs".into(), inputs.into());
    doc.insert("config".into(), config.into());
    fs::create_dir_all(dir)?;
    fs::write(dir.join("run.toml"), toml::to_string(&doc)?)?;
    Ok(())
}

pub fn to_table<T: serde::Serialize>(value: &T) -> Result<toml::Table> {
    Ok(toml::Table::try_from(value)?)
}
