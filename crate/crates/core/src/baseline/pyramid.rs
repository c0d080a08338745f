//! Laplacian-pyramid blending with a 5-tap binomial kernel and edge
//! replication.

use crate::error::{Error, Result};
use crate::imgio::PlaneR;
use crate::lut_engine::{blend_y, WeightMaps, BLEND_SUM_TOLERANCE};

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[inline]
fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Blurs then keeps even rows and columns; output is `ceil(w/2) x ceil(h/2)`.
pub fn pyramid_reduce(plane: &PlaneR) -> PlaneR {
    let (w, h) = plane.dims();
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let src = plane.data();
    // horizontal pass on even columns only
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        for ox in 0..ow {
            let x = 2 * ox as isize;
            tmp[y * ow + ox] =
                KERNEL.iter().enumerate().map(|(t, k)| k * src[y * w + clamp_idx(x + t as isize - 2, w)]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for oy in 0..oh {
        let y = 2 * oy as isize;
        for ox in 0..ow {
            out[oy * ow + ox] =
                KERNEL.iter().enumerate().map(|(t, k)| k * tmp[clamp_idx(y + t as isize - 2, h) * ow + ox]).sum();
        }
    }
    PlaneR::from_raw(ow, oh, out)
}

/// Interpolation taps for output index `i` from a coarse axis of length `n`.
fn expand_taps(i: usize, n: usize) -> [(usize, f64); 3] {
    let c = (i / 2) as isize;
    if i % 2 == 0 {
        [(clamp_idx(c - 1, n), 1.0 / 8.0), (clamp_idx(c, n), 6.0 / 8.0), (clamp_idx(c + 1, n), 1.0 / 8.0)]
    } else {
        [(clamp_idx(c, n), 0.5), (clamp_idx(c + 1, n), 0.5), (0, 0.0)]
    }
}

/// Upsamples a coarse level back to `out_w x out_h`.
pub fn pyramid_expand(plane: &PlaneR, out_w: usize, out_h: usize) -> PlaneR {
    let (w, h) = plane.dims();
    let src = plane.data();
    let mut tmp = vec![0.0; out_w * h];
    for y in 0..h {
        for x in 0..out_w {
            tmp[y * out_w + x] = expand_taps(x, w).iter().map(|&(j, k)| k * src[y * w + j]).sum();
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for y in 0..out_h {
        let taps = expand_taps(y, h);
        for x in 0..out_w {
            out[y * out_w + x] = taps.iter().map(|&(j, k)| k * tmp[j * out_w + x]).sum();
        }
    }
    PlaneR::from_raw(out_w, out_h, out)
}

pub fn gaussian_pyramid(plane: &PlaneR, levels: usize) -> Vec<PlaneR> {
    let mut out = vec![plane.clone()];
    for _ in 1..levels {
        let next = pyramid_reduce(out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

/// Band-pass levels followed by the coarsest Gaussian level.
pub fn laplacian_pyramid(plane: &PlaneR, levels: usize) -> Vec<PlaneR> {
    let g = gaussian_pyramid(plane, levels);
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels - 1 {
        let (w, h) = g[l].dims();
        let up = pyramid_expand(&g[l + 1], w, h);
        let band = g[l].data().iter().zip(up.data()).map(|(a, b)| a - b).collect();
        out.push(PlaneR::from_raw(w, h, band));
    }
    out.push(g[levels - 1].clone());
    out
}

/// Deepest pyramid allowed for a `w x h` image.
pub fn max_levels(w: usize, h: usize) -> usize {
    (w.min(h).max(1)).ilog2() as usize
}

/// `floor(log2(min side)) - 2`, at least 1.
pub fn default_levels(w: usize, h: usize) -> usize {
    max_levels(w, h).saturating_sub(2).max(1)
}

pub fn pyramid_blend(ystack: &[PlaneR], weights: &WeightMaps, levels: usize) -> Result<PlaneR> {
    let (w, h) = weights.dims();
    if levels == 0 || levels > max_levels(w, h) {
        return Err(Error::Config(format!(
            "{levels} pyramid levels invalid for {w}x{h} (allowed 1..={})",
            max_levels(w, h)
        )));
    }
    if levels == 1 {
        return blend_y(ystack, weights);
    }
    if ystack.len() != weights.k_frames() || ystack.iter().any(|p| p.dims() != (w, h)) {
        return Err(Error::StackShape("luma planes and weights do not match".into()));
    }
    if weights.max_sum_deviation() > BLEND_SUM_TOLERANCE {
        return Err(Error::WeightDomain(format!(
            "weights deviate from a partition of unity by {}",
            weights.max_sum_deviation()
        )));
    }
    let mut blended: Vec<Vec<f64>> = Vec::new();
    let mut dims = Vec::new();
    for (y, wk) in ystack.iter().zip(weights.planes()) {
        let lap = laplacian_pyramid(y, levels);
        let gw = gaussian_pyramid(wk, levels);
        if blended.is_empty() {
            blended = lap.iter().map(|p| vec![0.0; p.data().len()]).collect();
            dims = lap.iter().map(PlaneR::dims).collect();
        }
        for l in 0..levels {
            for (acc, (a, b)) in blended[l].iter_mut().zip(lap[l].data().iter().zip(gw[l].data())) {
                *acc += a * b;
            }
        }
    }
    let (tw, th) = dims[levels - 1];
    let mut recon = PlaneR::from_raw(tw, th, blended.pop().expect("levels >= 2"));
    for l in (0..levels - 1).rev() {
        let (lw, lh) = dims[l];
        let up = pyramid_expand(&recon, lw, lh);
        let data = up.data().iter().zip(&blended[l]).map(|(a, b)| a + b).collect();
        recon = PlaneR::from_raw(lw, lh, data);
    }
    recon.data_mut().iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(recon)
}
