//! Binary Gram-field cache.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"NPFG"`                         |
//! | 4      | 4    | version (`u32`, currently 1)            |
//! | 8      | 4    | ambient dimension `D` (`u32`)           |
//! | 12     | 4    | degree `k` (`u32`)                      |
//! | 16     | 8    | point count `m` (`u64`)                 |
//! | 24     | 4    | precision (`u32`: 0 = fp32, 1 = fp64)   |
//! | 28     | ...  | payload                                 |
//!
//! The payload is `m` row-major `B×B` matrices (`B = C(D,k)`), point after point,
//! with rows and columns in [`MultiIndexTable`](super::multi_index::MultiIndexTable) order.

use std::fs;
use std::path::Path;

use ndarray::Array3;

use super::multi_index::{binomial, multi_index_table};
use crate::error::{NpfError, Result};
use crate::gram::GramField;

pub const MAGIC: [u8; 4] = *b"NPFG";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Fp32,
    Fp64,
}

impl Precision {
    pub fn width(self) -> usize {
        match self {
            Precision::Fp32 => 4,
            Precision::Fp64 => 8,
        }
    }

    fn flag(self) -> u32 {
        match self {
            Precision::Fp32 => 0,
            Precision::Fp64 => 1,
        }
    }

    fn from_flag(flag: u32) -> Result<Self> {
        match flag {
            0 => Ok(Precision::Fp32),
            1 => Ok(Precision::Fp64),
            other => Err(NpfError::CacheFormat(format!("unknown precision flag {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramCacheHeader {
    pub version: u32,
    pub dim: u32,
    pub degree: u32,
    pub points: u64,
    pub precision: Precision,
}

impl GramCacheHeader {
    pub fn basis_len(&self) -> usize {
        binomial(self.dim as usize, self.degree as usize)
    }

    pub fn payload_len(&self) -> usize {
        let b = self.basis_len();
        self.points as usize * b * b * self.precision.width()
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&self.dim.to_le_bytes());
        out.extend_from_slice(&self.degree.to_le_bytes());
        out.extend_from_slice(&self.points.to_le_bytes());
        out.extend_from_slice(&self.precision.flag().to_le_bytes());
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(NpfError::CacheFormat(format!(
                "truncated header: {} of {HEADER_LEN} bytes",
                bytes.len()
            )));
        }
        if bytes[0..4] != MAGIC {
            return Err(NpfError::CacheFormat(format!("bad magic {:?}", &bytes[0..4])));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(NpfError::CacheFormat(format!("unsupported version {version}")));
        }
        let points = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        Ok(Self {
            version,
            dim: u32_at(8),
            degree: u32_at(12),
            points,
            precision: Precision::from_flag(u32_at(24))?,
        })
    }
}

pub fn encode_gram_field(field: &GramField, precision: Precision) -> Vec<u8> {
    let header = GramCacheHeader {
        version: VERSION,
        dim: field.dim() as u32,
        degree: field.degree() as u32,
        points: field.len() as u64,
        precision,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + header.payload_len());
    header.encode(&mut out);
    // standard layout iterates point, row, column
    match precision {
        Precision::Fp32 => {
            for &v in field.values().iter() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Precision::Fp64 => {
            for &v in field.values().iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_gram_field(bytes: &[u8]) -> Result<(GramCacheHeader, GramField)> {
    let header = GramCacheHeader::decode(bytes)?;
    let table = multi_index_table(header.dim as usize, header.degree as usize)
        .map_err(|e| NpfError::CacheFormat(format!("header describes no valid basis: {e}")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != header.payload_len() {
        return Err(NpfError::CacheFormat(format!(
            "payload is {} bytes, header implies {}",
            payload.len(),
            header.payload_len()
        )));
    }
    let b = table.len();
    let values: Vec<f64> = match header.precision {
        Precision::Fp32 => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect(),
        Precision::Fp64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    let values = Array3::from_shape_vec((header.points as usize, b, b), values)
        .map_err(|e| NpfError::CacheFormat(e.to_string()))?;
    Ok((header, GramField::from_parts(table, values)?))
}

pub fn write_gram_cache(path: impl AsRef<Path>, field: &GramField, precision: Precision) -> Result<u64> {
    let bytes = encode_gram_field(field, precision);
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn read_gram_cache(path: impl AsRef<Path>) -> Result<GramField> {
    let bytes = fs::read(path)?;
    decode_gram_field(&bytes).map(|(_, field)| field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(m: usize, dim: usize, degree: usize, fill: impl Fn(usize) -> f64) -> GramField {
        let table = multi_index_table(dim, degree).unwrap();
        let b = table.len();
        let values = Array3::from_shape_fn((m, b, b), |(p, i, j)| {
            let (i, j) = (i.min(j), i.max(j));
            fill(p * b * b + i * b + j)
        });
        GramField::from_parts(table, values).unwrap()
    }

    #[test]
    fn zero_field_roundtrip_identical_bytes() {
        let f = field(5, 3, 2, |_| 0.0);
        for precision in [Precision::Fp32, Precision::Fp64] {
            let bytes = encode_gram_field(&f, precision);
            let (header, back) = decode_gram_field(&bytes).unwrap();
            assert_eq!(header.precision, precision);
            assert_eq!(encode_gram_field(&back, precision), bytes);
            assert_eq!(back, f);
        }
    }

    #[test]
    fn header_layout_is_pinned() {
        let f = field(2, 2, 1, |i| i as f64);
        let bytes = encode_gram_field(&f, Precision::Fp32);
        assert_eq!(&bytes[0..4], b"NPFG");
        assert_eq!(bytes[4..8], 1u32.to_le_bytes());
        assert_eq!(bytes[8..12], 2u32.to_le_bytes());
        assert_eq!(bytes[12..16], 1u32.to_le_bytes());
        assert_eq!(bytes[16..24], 2u64.to_le_bytes());
        assert_eq!(bytes[24..28], 0u32.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 4 * 4);
    }

    #[test]
    fn fp64_narrowed_to_fp32() {
        let f = field(3, 3, 1, |i| (i as f64 * 0.1).sin() / 3.0);
        let bytes = encode_gram_field(&f, Precision::Fp32);
        let (_, back) = decode_gram_field(&bytes).unwrap();
        for (a, b) in f.values().iter().zip(back.values().iter()) {
            assert_eq!(*b, f64::from(*a as f32));
            assert!((a - b).abs() <= a.abs() * f64::from(f32::EPSILON));
        }
    }

    #[test]
    fn wrong_magic_version_and_truncation() {
        let f = field(2, 2, 1, |i| i as f64);
        let good = encode_gram_field(&f, Precision::Fp64);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_gram_field(&bad), Err(NpfError::CacheFormat(_))));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode_gram_field(&bad), Err(NpfError::CacheFormat(_))));

        let bad = &good[..good.len() - 3];
        assert!(matches!(decode_gram_field(bad), Err(NpfError::CacheFormat(_))));
        assert!(matches!(decode_gram_field(&good[..10]), Err(NpfError::CacheFormat(_))));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.npfg");
        let f = field(4, 4, 2, |i| 1.0 / (i as f64 + 1.0));
        let n = write_gram_cache(&path, &f, Precision::Fp64).unwrap();
        assert_eq!(n as usize, HEADER_LEN + 4 * 36 * 8);
        assert_eq!(read_gram_cache(&path).unwrap(), f);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn roundtrip_bit_exact(m in 1usize..6, dim in 1usize..6, degree in 1usize..4, seed in any::<u64>()) {
            prop_assume!(degree <= dim);
            let f64_field = field(m, dim, degree, |i| {
                let x = (seed.wrapping_mul(6364136223846793005).wrapping_add((i as u64).wrapping_mul(1442695040888963407))) >> 11;
                x as f64 / (1u64 << 53) as f64 - 0.5
            });
            let back = decode_gram_field(&encode_gram_field(&f64_field, Precision::Fp64)).unwrap().1;
            prop_assert_eq!(&back, &f64_field);
            // at fp32, a field already on the fp32 grid survives bit-exactly
            let narrowed = decode_gram_field(&encode_gram_field(&f64_field, Precision::Fp32)).unwrap().1;
            let again = decode_gram_field(&encode_gram_field(&narrowed, Precision::Fp32)).unwrap().1;
            prop_assert_eq!(again, narrowed);
        }
    }
}
