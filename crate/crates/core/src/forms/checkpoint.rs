//! Model checkpoints: `NPFM`, version, TOML header, fp32 parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{FormModel, ModelSpec};
use super::train::TrainConfig;
use crate::error::{NpfError, Result};

pub const MAGIC: [u8; 4] = *b"NPFM";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub model: ModelSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
}

/// Layout: magic, `u32` version, `u32` header length, TOML header, `u64` count, little-endian `f32` parameters.
pub fn encode_checkpoint(model: &FormModel, train: Option<&TrainConfig>) -> Result<Vec<u8>> {
    let header = CheckpointHeader { model: model.spec(), train: train.cloned() };
    let text = toml::to_string(&header).map_err(|e| NpfError::Config(e.to_string()))?;
    let params = model.params();
    let mut out = Vec::with_capacity(20 + text.len() + 4 * params.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(text.len() as u32).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    Ok(out)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(NpfError::CacheFormat("truncated checkpoint".into()));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

pub fn decode_checkpoint(mut bytes: &[u8]) -> Result<(FormModel, CheckpointHeader)> {
    let b = &mut bytes;
    if take(b, 4)? != MAGIC {
        return Err(NpfError::CacheFormat("not a model checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(b, 4)?.try_into().unwrap());
    if version != VERSION {
        return Err(NpfError::CacheFormat(format!("unsupported checkpoint version {version}")));
    }
    let len = u32::from_le_bytes(take(b, 4)?.try_into().unwrap()) as usize;
    let text = std::str::from_utf8(take(b, len)?).map_err(|e| NpfError::CacheFormat(e.to_string()))?;
    let header: CheckpointHeader = toml::from_str(text).map_err(|e| NpfError::CacheFormat(e.to_string()))?;
    let count = u64::from_le_bytes(take(b, 8)?.try_into().unwrap()) as usize;
    let mut model = FormModel::new(&header.model)?;
    if count != model.num_params() {
        return Err(NpfError::CacheFormat(format!("expected {} parameters, found {count}", model.num_params())));
    }
    let raw = take(b, 4 * count)?;
    if !b.is_empty() {
        return Err(NpfError::CacheFormat("trailing bytes after parameters".into()));
    }
    let params: Vec<f64> = raw.chunks_exact(4).map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap()))).collect();
    model.set_params(&params)?;
    Ok((model, header))
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &FormModel, train: Option<&TrainConfig>) -> Result<()> {
    std::fs::write(path, encode_checkpoint(model, train)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(FormModel, CheckpointHeader)> {
    decode_checkpoint(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::ReadoutKind;

    #[test]
    fn roundtrip_on_fp32_grid_is_exact() {
        let spec = ModelSpec { input_dim: 3, hidden: vec![4, 2], ell: 2, degree: 2, readout: ReadoutKind::Flat };
        let mut model = FormModel::new(&spec).unwrap();
        model.init_uniform(&mut crate::rng::stream(0, "ckpt", 0));
        let theta: Vec<f64> = model.params().iter().map(|&p| f64::from(p as f32)).collect();
        model.set_params(&theta).unwrap();
        let cfg = TrainConfig::default();
        let bytes = encode_checkpoint(&model, Some(&cfg)).unwrap();
        let (back, header) = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back, model);
        assert_eq!(header.train, Some(cfg));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.npfm");
        save_checkpoint(&path, &model, None).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap().0, model);
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let model = FormModel::new(&ModelSpec { input_dim: 2, hidden: vec![], ell: 1, degree: 1, readout: ReadoutKind::Tri }).unwrap();
        let bytes = encode_checkpoint(&model, None).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_checkpoint(&bad).is_err());
        assert!(decode_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(decode_checkpoint(&long).is_err());
    }
}
