use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgio::{LutMatrix, PlaneR, LUT_SIZE};
use crate::network::{network_forward, NetworkParams};

pub const DEFAULT_PROBE_SIZE: usize = 128;

fn probe(params: &NetworkParams, v: usize, size: usize) -> Result<Vec<f64>> {
    let value = v as f64 / 255.0;
    let planes: Vec<PlaneR> = (0..params.k_frames()).map(|_| PlaneR::filled(size, size, value)).collect::<Result<_>>()?;
    Ok(network_forward(&planes, params)?.planes().iter().map(PlaneR::mean).collect())
}

/// Probes the network with constant gray stacks `v/255` and stores the
/// spatial mean of each frame's weight map as `L(k, v)`.
pub fn extract_luts_with(params: &NetworkParams, probe_size: usize, threads: usize) -> Result<LutMatrix> {
    if probe_size == 0 {
        return Err(Error::Config("probe size must be >= 1".into()));
    }
    let columns: Vec<Vec<f64>> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..LUT_SIZE).into_par_iter().map(|v| probe(params, v, probe_size)).collect::<Result<_>>())?
    } else {
        (0..LUT_SIZE).map(|v| probe(params, v, probe_size)).collect::<Result<_>>()?
    };
    LutMatrix::from_fn(params.k_frames(), |k, v| columns[v][k] as f32)
}

pub fn extract_luts(params: &NetworkParams) -> Result<LutMatrix> {
    extract_luts_with(params, DEFAULT_PROBE_SIZE, 1)
}
