use super::WeightMaps;
use crate::error::{Error, Result};
use crate::imgio::{quantize_u8, Plane8, PlaneR};

/// Maximum per-pixel deviation of the weight sum from 1 accepted by [`blend_y`].
pub const BLEND_SUM_TOLERANCE: f64 = 1e-3;

/// Convex per-pixel combination `sum_k W_k * Y_k`.
pub fn blend_y(ystack: &[PlaneR], weights: &WeightMaps) -> Result<PlaneR> {
    if ystack.len() != weights.k_frames() {
        return Err(Error::StackShape(format!(
            "{} luma planes but {} weight maps",
            ystack.len(),
            weights.k_frames()
        )));
    }
    let dims = weights.dims();
    if ystack.iter().any(|p| p.dims() != dims) {
        return Err(Error::StackShape("luma planes and weights differ in size".into()));
    }
    let (w, h) = dims;
    let mut acc = vec![0.0; w * h];
    let mut sums = vec![0.0; w * h];
    for (y, wk) in ystack.iter().zip(weights.planes()) {
        for ((a, s), (&yv, &wv)) in acc.iter_mut().zip(sums.iter_mut()).zip(y.data().iter().zip(wk.data())) {
            *a += wv * yv;
            *s += wv;
        }
    }
    if let Some((i, s)) = sums.iter().enumerate().find(|(_, s)| !((**s - 1.0).abs() <= BLEND_SUM_TOLERANCE)) {
        return Err(Error::WeightDomain(format!(
            "weights at pixel ({}, {}) sum to {s}",
            i % w,
            i / w
        )));
    }
    acc.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(PlaneR::from_raw(w, h, acc))
}

/// Chroma merge weighted by distance from the neutral value `tau`.
pub fn merge_uv(planes: &[&Plane8], tau: u8) -> Result<Plane8> {
    let first = planes
        .first()
        .ok_or_else(|| Error::StackShape("no chroma planes to merge".into()))?;
    let (w, h) = first.dims();
    if planes.iter().any(|p| p.dims() != (w, h)) {
        return Err(Error::StackShape("chroma planes differ in size".into()));
    }
    let tau_f = tau as f64;
    let out = (0..w * h)
        .map(|i| {
            let (mut num, mut den) = (0.0, 0.0);
            for p in planes {
                let v = p.data()[i] as f64;
                let d = (v - tau_f).abs();
                num += d * v;
                den += d;
            }
            if den == 0.0 {
                tau
            } else {
                quantize_u8(num / den)
            }
        })
        .collect();
    Plane8::new(w, h, out)
}
