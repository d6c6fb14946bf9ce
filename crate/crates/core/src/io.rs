//! Binary matrix containers and JSON sidecars.
//!
//! A container is an 8-byte magic, the row and column counts as little-endian
//! `u32`, then `rows · cols` little-endian IEEE-754 `f64` values in
//! column-major order:
//!
//! | magic       | contents                         |
//! |-------------|----------------------------------|
//! | `SDICT\0v1` | dictionary, `m × K`              |
//! | `SDATA\0v1` | training set, `m × N`            |
//!
//! Sparse codes use `SCODE\0v1`: magic, `K` and `N` as `u32`, then per column
//! a `u32` nonzero count followed by that many (`u32` index, `f64` value)
//! pairs, indices increasing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, TrainingSet};
use crate::error::{Error, Result};
use crate::sparse::{SparseCodeMatrix, SparseVector};

pub const DICT_MAGIC: &[u8; 8] = b"SDICT\0v1";
pub const DATA_MAGIC: &[u8; 8] = b"SDATA\0v1";
pub const CODE_MAGIC: &[u8; 8] = b"SCODE\0v1";

fn dim_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidInput(format!("{what} {n} does not fit in u32")))
}

pub fn encode_matrix(magic: &[u8; 8], m: &DMatrix<f64>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + 8 * m.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&dim_u32(m.nrows(), "row count")?.to_le_bytes());
    out.extend_from_slice(&dim_u32(m.ncols(), "column count")?.to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(self.origin, "unexpected end of file"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, expected: &[u8; 8]) -> Result<()> {
        let got = self.take(8)?;
        if got != expected {
            return Err(Error::format(
                self.origin,
                format!("bad magic {:?}, expected {:?}", got, expected),
            ));
        }
        Ok(())
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.origin,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub fn decode_matrix(magic: &[u8; 8], bytes: &[u8], origin: &Path) -> Result<DMatrix<f64>> {
    let mut r = Reader { bytes, pos: 0, origin };
    r.magic(magic)?;
    let rows = r.u32()?;
    let cols = r.u32()?;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format(origin, "matrix size overflows"))?;
    if bytes.len() - r.pos != expected {
        return Err(Error::format(
            origin,
            format!("payload has {} bytes, expected {expected}", bytes.len() - r.pos),
        ));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        values.push(r.f64()?);
    }
    Ok(DMatrix::from_vec(rows, cols, values))
}

pub fn encode_codes(codes: &SparseCodeMatrix) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(CODE_MAGIC);
    out.extend_from_slice(&dim_u32(codes.rows(), "row count")?.to_le_bytes());
    out.extend_from_slice(&dim_u32(codes.ncols(), "column count")?.to_le_bytes());
    for col in codes.columns() {
        out.extend_from_slice(&dim_u32(col.nnz(), "nonzero count")?.to_le_bytes());
        for &(i, v) in col.entries() {
            out.extend_from_slice(&(i as u32).to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_codes(bytes: &[u8], origin: &Path) -> Result<SparseCodeMatrix> {
    let mut r = Reader { bytes, pos: 0, origin };
    r.magic(CODE_MAGIC)?;
    let rows = r.u32()?;
    let cols = r.u32()?;
    let mut columns = Vec::with_capacity(cols.min(bytes.len()));
    for _ in 0..cols {
        let nnz = r.u32()?;
        let mut pairs = Vec::with_capacity(nnz.min(rows));
        for _ in 0..nnz {
            let i = r.u32()?;
            pairs.push((i, r.f64()?));
        }
        let col = SparseVector::from_pairs(rows, pairs)
            .map_err(|e| Error::format(origin, e.to_string()))?;
        columns.push(col);
    }
    r.finish()?;
    SparseCodeMatrix::new(rows, columns)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_dictionary(path: impl AsRef<Path>, dict: &Dictionary) -> Result<()> {
    write_bytes(path.as_ref(), &encode_matrix(DICT_MAGIC, dict.matrix())?)
}

pub fn read_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    let path = path.as_ref();
    let m = decode_matrix(DICT_MAGIC, &read_bytes(path)?, path)?;
    Dictionary::new(m).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_training_set(path: impl AsRef<Path>, data: &TrainingSet) -> Result<()> {
    write_bytes(path.as_ref(), &encode_matrix(DATA_MAGIC, data.matrix())?)
}

pub fn read_training_set(path: impl AsRef<Path>) -> Result<TrainingSet> {
    let path = path.as_ref();
    Ok(TrainingSet::new(decode_matrix(DATA_MAGIC, &read_bytes(path)?, path)?))
}

pub fn write_codes(path: impl AsRef<Path>, codes: &SparseCodeMatrix) -> Result<()> {
    write_bytes(path.as_ref(), &encode_codes(codes)?)
}

pub fn read_codes(path: impl AsRef<Path>) -> Result<SparseCodeMatrix> {
    let path = path.as_ref();
    decode_codes(&read_bytes(path)?, path)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// `dict.sdict` → `dict.sdict.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Record written next to the outputs of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config_path: None,
            seed,
            threads: rayon::current_num_threads(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}
