//! Bilinear resampling with the half-pixel-center convention.
//!
//! Output sample `i` sits at input coordinate `(i + 0.5) * scale - 0.5`,
//! where `scale` is input extent over output extent. Coordinates are clamped
//! to the valid range, so borders replicate.

use super::plane::{Plane8, PlaneR};
use crate::error::{Error, Result};

/// Per-output-sample interpolation taps along one axis.
#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

fn axis_taps(in_len: usize, out_len: usize, scale: f64) -> Vec<Tap> {
    let max = (in_len - 1) as f64;
    (0..out_len)
        .map(|i| {
            let x = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let lo = x.floor() as usize;
            let hi = (lo + 1).min(in_len - 1);
            Tap { lo, hi, frac: x - lo as f64 }
        })
        .collect()
}

fn resample_with<F: Fn(usize) -> f64>(
    sample: F,
    in_w: usize,
    xs: &[Tap],
    ys: &[Tap],
) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for ty in ys {
        let r0 = ty.lo * in_w;
        let r1 = ty.hi * in_w;
        for tx in xs {
            let top = sample(r0 + tx.lo) * (1.0 - tx.frac) + sample(r0 + tx.hi) * tx.frac;
            let bot = sample(r1 + tx.lo) * (1.0 - tx.frac) + sample(r1 + tx.hi) * tx.frac;
            out.push(top * (1.0 - ty.frac) + bot * ty.frac);
        }
    }
    out
}

/// Downsamples an 8-bit plane by integer rate `s`, producing `[0,1]` reals of
/// size `ceil(H/s) x ceil(W/s)`.
pub fn downsample_bilinear(plane: &Plane8, s: usize) -> Result<PlaneR> {
    if s < 1 {
        return Err(Error::Config("downsampling rate must be >= 1".into()));
    }
    let (w, h) = plane.dims();
    if s == 1 {
        return Ok(plane.to_unit());
    }
    let (ow, oh) = (w.div_ceil(s), h.div_ceil(s));
    let xs = axis_taps(w, ow, s as f64);
    let ys = axis_taps(h, oh, s as f64);
    let data = plane.data();
    let out = resample_with(|i| data[i] as f64, w, &xs, &ys);
    Ok(PlaneR::from_raw(ow, oh, out.into_iter().map(|v| v / 255.0).collect()))
}

/// Resizes a real plane to arbitrary dimensions.
pub fn resize_bilinear(plane: &PlaneR, out_w: usize, out_h: usize) -> Result<PlaneR> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::StackShape(format!("cannot resize to {out_w}x{out_h}")));
    }
    let (w, h) = plane.dims();
    if (w, h) == (out_w, out_h) {
        return Ok(plane.clone());
    }
    let xs = axis_taps(w, out_w, w as f64 / out_w as f64);
    let ys = axis_taps(h, out_h, h as f64 / out_h as f64);
    let data = plane.data();
    Ok(PlaneR::from_raw(out_w, out_h, resample_with(|i| data[i], w, &xs, &ys)))
}

/// Picks the integer downsampling rate that brings the short side close to
/// `target_min` without going under it.
pub fn choose_rate(height: usize, width: usize, target_min: usize) -> usize {
    let target = target_min.max(1);
    (height.min(width) / target).max(1)
}
