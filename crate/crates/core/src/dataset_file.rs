//! The `.tgds` intermediate dataset file.
//!
//! ```text
//! magic "TGDS" | version u8 = 1 | n_rows u32 | n_cols u32
//! n_cols × (name_len u32, UTF-8 name bytes)
//! n_rows × n_cols f64 values, row-major
//! missing bitmask, row-major, LSB-first, ceil(n_rows·n_cols / 8) bytes
//! ```
//!
//! All integers and floats are little-endian.

use ndarray::Array2;
use thiserror::Error;

use crate::ingest::Dataset;

pub const MAGIC: [u8; 4] = *b"TGDS";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetFileError {
    #[error("not a dataset file (bad magic)")]
    BadMagic,
    #[error("unsupported dataset format version {0}")]
    Version(u8),
    #[error("truncated dataset file")]
    Truncated,
    #[error("column name is not valid UTF-8")]
    BadName,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("dataset dimension {0} does not fit in 32 bits")]
    TooLarge(usize),
}

fn u32_of(n: usize) -> Result<u32, DatasetFileError> {
    u32::try_from(n).map_err(|_| DatasetFileError::TooLarge(n))
}

pub fn encode(ds: &Dataset) -> Result<Vec<u8>, DatasetFileError> {
    let (rows, cols) = (ds.n_rows(), ds.n_cols());
    let cells = rows * cols;
    let mut out = Vec::with_capacity(13 + cells * 8 + cells.div_ceil(8));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&u32_of(rows)?.to_le_bytes());
    out.extend_from_slice(&u32_of(cols)?.to_le_bytes());
    for name in &ds.column_names {
        out.extend_from_slice(&u32_of(name.len())?.to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    for v in ds.values.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut mask = vec![0u8; cells.div_ceil(8)];
    for (i, &m) in ds.missing.iter().enumerate() {
        if m {
            mask[i / 8] |= 1 << (i % 8);
        }
    }
    out.extend_from_slice(&mask);
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DatasetFileError> {
        let end = self.pos.checked_add(n).ok_or(DatasetFileError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(DatasetFileError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, DatasetFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}

pub fn decode(bytes: &[u8]) -> Result<Dataset, DatasetFileError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(DatasetFileError::BadMagic);
    }
    let version = c.take(1)?[0];
    if version != VERSION {
        return Err(DatasetFileError::Version(version));
    }
    let rows = c.u32()?;
    let cols = c.u32()?;
    let mut column_names = Vec::with_capacity(cols);
    for _ in 0..cols {
        let len = c.u32()?;
        let name = std::str::from_utf8(c.take(len)?).map_err(|_| DatasetFileError::BadName)?;
        column_names.push(name.to_string());
    }
    let cells = rows.checked_mul(cols).ok_or(DatasetFileError::Truncated)?;
    let raw = c.take(cells.checked_mul(8).ok_or(DatasetFileError::Truncated)?)?;
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let mask = c.take(cells.div_ceil(8))?;
    let missing: Vec<bool> = (0..cells).map(|i| mask[i / 8] & (1 << (i % 8)) != 0).collect();
    if c.pos != bytes.len() {
        return Err(DatasetFileError::TrailingBytes(bytes.len() - c.pos));
    }
    Ok(Dataset {
        column_names,
        values: Array2::from_shape_vec((rows, cols), values).expect("shape matches"),
        missing: Array2::from_shape_vec((rows, cols), missing).expect("shape matches"),
    })
}
