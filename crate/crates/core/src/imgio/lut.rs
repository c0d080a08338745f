//! The per-exposure weight table and its on-disk form.
//!
//! File layout (all little-endian):
//!
//! ```text
//! "MEFL"            4 bytes magic
//! version: u16      currently 1
//! k: u16            number of exposures
//! table: f32[k*256] row-major, row k = exposure k, column v = intensity v
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const LUT_MAGIC: &[u8; 4] = b"MEFL";
pub const LUT_VERSION: u16 = 1;
pub const LUT_SIZE: usize = 256;

/// `K x 256` table mapping an 8-bit luma value to a fusion weight per exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct LutMatrix {
    k_frames: usize,
    table: Vec<f32>,
}

impl LutMatrix {
    /// Entries must be finite and non-negative, and every intensity column
    /// must carry some weight.
    pub fn new(k_frames: usize, table: Vec<f32>) -> Result<Self> {
        if k_frames == 0 || k_frames > u16::MAX as usize {
            return Err(Error::StackShape(format!("invalid LUT frame count {k_frames}")));
        }
        if table.len() != k_frames * LUT_SIZE {
            return Err(Error::StackShape(format!(
                "LUT with {k_frames} rows needs {} entries, got {}",
                k_frames * LUT_SIZE,
                table.len()
            )));
        }
        if let Some(i) = table.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::WeightDomain(format!(
                "LUT entry ({}, {}) = {} is not a finite non-negative weight",
                i / LUT_SIZE,
                i % LUT_SIZE,
                table[i]
            )));
        }
        for v in 0..LUT_SIZE {
            let col: f64 = (0..k_frames).map(|k| table[k * LUT_SIZE + v] as f64).sum();
            if col <= 0.0 {
                return Err(Error::WeightDomain(format!("LUT column {v} sums to zero")));
            }
        }
        Ok(Self { k_frames, table })
    }

    /// Builds from one closure per (exposure, intensity).
    pub fn from_fn<F: FnMut(usize, usize) -> f32>(k_frames: usize, mut f: F) -> Result<Self> {
        let mut table = Vec::with_capacity(k_frames * LUT_SIZE);
        for k in 0..k_frames {
            for v in 0..LUT_SIZE {
                table.push(f(k, v));
            }
        }
        Self::new(k_frames, table)
    }

    pub fn k_frames(&self) -> usize {
        self.k_frames
    }

    pub fn row(&self, k: usize) -> &[f32] {
        &self.table[k * LUT_SIZE..(k + 1) * LUT_SIZE]
    }

    #[inline]
    pub fn get(&self, k: usize, v: u8) -> f32 {
        self.table[k * LUT_SIZE + v as usize]
    }

    pub fn table(&self) -> &[f32] {
        &self.table
    }

    /// Reorders rows; `order[i]` is the source row of output row `i`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.k_frames {
            return Err(Error::StackShape("row permutation length mismatch".into()));
        }
        let mut table = Vec::with_capacity(self.table.len());
        for &src in order {
            table.extend_from_slice(self.row(src));
        }
        Self::new(self.k_frames, table)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.table.len() * 4);
        out.extend_from_slice(LUT_MAGIC);
        out.extend_from_slice(&LUT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.k_frames as u16).to_le_bytes());
        for v in &self.table {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn read_from<R: Read>(mut reader: R) -> Result<Self> {
        let mut header = [0u8; 8];
        reader.read_exact(&mut header)?;
        if &header[..4] != LUT_MAGIC {
            return Err(Error::Format(format!("bad LUT magic {:?}", &header[..4])));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != LUT_VERSION {
            return Err(Error::Format(format!("unsupported LUT version {version}")));
        }
        let k = u16::from_le_bytes([header[6], header[7]]) as usize;
        let mut raw = vec![0u8; k * LUT_SIZE * 4];
        reader.read_exact(&mut raw)?;
        let table: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if table.iter().any(|v| v.is_nan()) {
            return Err(Error::Format("NaN entry in LUT".into()));
        }
        Self::new(k, table).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writer.write_all(&self.to_bytes())
    }
}

pub fn write_lut(lut: &LutMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, lut.to_bytes())?;
    Ok(())
}

pub fn read_lut(path: impl AsRef<Path>) -> Result<LutMatrix> {
    let bytes = fs::read(path)?;
    LutMatrix::read_from(bytes.as_slice())
}
