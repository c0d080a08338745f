//! Binary checkpoint: `"MEFN"`, u16 version, u16 K, u16 C, u16 rate count,
//! u16 rates, then every tensor as u32 ndim, u32 dims and f32 values, all
//! little-endian, in [`NetworkParams::tensors`] order.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::params::{NetworkHyper, NetworkParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"MEFN";
pub const CHECKPOINT_VERSION: u16 = 1;

fn read_u16<R: Read>(r: &mut R) -> io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn narrow(v: usize, what: &str) -> Result<u16> {
    u16::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit the checkpoint header")))
}

pub fn write_checkpoint_to<W: Write>(params: &NetworkParams, mut w: W) -> Result<()> {
    let hyper = &params.hyper;
    w.write_all(&CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&narrow(hyper.k_frames, "K")?.to_le_bytes())?;
    w.write_all(&narrow(hyper.channels, "channels")?.to_le_bytes())?;
    w.write_all(&narrow(hyper.rates.len(), "rate count")?.to_le_bytes())?;
    for &r in &hyper.rates {
        w.write_all(&narrow(r, "rate")?.to_le_bytes())?;
    }
    for t in params.tensors() {
        w.write_all(&(t.dims.len() as u32).to_le_bytes())?;
        for &d in &t.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(t.data.len() * 4);
        for &v in t.data {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint_from<R: Read>(mut r: R) -> Result<NetworkParams> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a network checkpoint (bad magic)".into()));
    }
    let version = read_u16(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let k = read_u16(&mut r)? as usize;
    let c = read_u16(&mut r)? as usize;
    let n_rates = read_u16(&mut r)? as usize;
    let rates = (0..n_rates).map(|_| read_u16(&mut r).map(usize::from)).collect::<io::Result<Vec<_>>>()?;
    let hyper = NetworkHyper { k_frames: k, channels: c, rates };
    let mut params = NetworkParams::zeros(hyper).map_err(|e| Error::Format(format!("bad checkpoint header: {e}")))?;
    let expected: Vec<(String, Vec<usize>)> = params.tensors().into_iter().map(|t| (t.name, t.dims)).collect();
    for ((name, dims), dst) in expected.into_iter().zip(params.tensors_mut()) {
        let ndim = read_u32(&mut r)? as usize;
        if ndim != dims.len() {
            return Err(Error::Format(format!("{name}: expected {} dims, found {ndim}", dims.len())));
        }
        let found = (0..ndim).map(|_| read_u32(&mut r).map(|d| d as usize)).collect::<io::Result<Vec<_>>>()?;
        if found != dims {
            return Err(Error::Format(format!("{name}: expected shape {dims:?}, found {found:?}")));
        }
        let mut raw = vec![0u8; dst.len() * 4];
        r.read_exact(&mut raw)?;
        for (v, b) in dst.iter_mut().zip(raw.chunks_exact(4)) {
            let x = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
            if !x.is_finite() {
                return Err(Error::Format(format!("{name}: non-finite value")));
            }
            *v = x as f64;
        }
    }
    Ok(params)
}

pub fn write_checkpoint(params: &NetworkParams, path: impl AsRef<Path>) -> Result<()> {
    write_checkpoint_to(params, BufWriter::new(File::create(path)?))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<NetworkParams> {
    read_checkpoint_from(BufReader::new(File::open(path)?))
}
