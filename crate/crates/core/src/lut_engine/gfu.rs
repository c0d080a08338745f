//! Guided-filter upsampling of weight maps.
//!
//! Linear coefficients `a, b` are fit at low resolution so that
//! `w ≈ a * guide + b` inside every box window, smoothed, bilinearly resized
//! to the full-resolution grid and re-applied to the full-resolution guide.

use crate::error::{Error, Result};
use crate::imgio::{resize_bilinear, PlaneR};

/// Mean over the `(2r+1)^2` window clipped to the plane.
pub fn box_mean(plane: &PlaneR, radius: usize) -> PlaneR {
    let (w, h) = plane.dims();
    let src = plane.data();
    // horizontal window sums, then vertical; counts tracked per axis
    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius).min(w - 1);
            horiz[y * w + x] = row[x0..=x1].iter().sum::<f64>() / (x1 - x0 + 1) as f64;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius).min(h - 1);
        let inv = 1.0 / (y1 - y0 + 1) as f64;
        let dst = &mut out[y * w..(y + 1) * w];
        for yy in y0..=y1 {
            for (d, s) in dst.iter_mut().zip(&horiz[yy * w..(yy + 1) * w]) {
                *d += s;
            }
        }
        dst.iter_mut().for_each(|d| *d *= inv);
    }
    PlaneR::from_raw(w, h, out)
}

/// Smoothed guided-filter coefficients at the guide's resolution.
pub fn guided_coefficients(input: &PlaneR, guide: &PlaneR, radius: usize, eps: f64) -> Result<(PlaneR, PlaneR)> {
    if input.dims() != guide.dims() {
        return Err(Error::StackShape(format!(
            "guided filter input {:?} vs guide {:?}",
            input.dims(),
            guide.dims()
        )));
    }
    let (w, h) = input.dims();
    let prod = |a: &PlaneR, b: &PlaneR| {
        PlaneR::from_raw(w, h, a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect())
    };
    let mean_i = box_mean(guide, radius);
    let mean_p = box_mean(input, radius);
    let corr_ip = box_mean(&prod(guide, input), radius);
    let corr_ii = box_mean(&prod(guide, guide), radius);

    let n = w * h;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let mi = mean_i.data()[i];
        let mp = mean_p.data()[i];
        let var = corr_ii.data()[i] - mi * mi;
        let cov = corr_ip.data()[i] - mi * mp;
        let ai = cov / (var + eps);
        a.push(ai);
        b.push(mp - ai * mi);
    }
    let a = box_mean(&PlaneR::from_raw(w, h, a), radius);
    let b = box_mean(&PlaneR::from_raw(w, h, b), radius);
    Ok((a, b))
}

/// Plain guided filter at a single resolution.
pub fn guided_filter(input: &PlaneR, guide: &PlaneR, radius: usize, eps: f64) -> Result<PlaneR> {
    let (a, b) = guided_coefficients(input, guide, radius, eps)?;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .zip(guide.data())
        .map(|((a, b), g)| a * g + b)
        .collect();
    Ok(PlaneR::from_raw(guide.width(), guide.height(), data))
}

/// Upsamples `wlow` to the size of `yfull`, steered by the two guides.
/// Negative outputs are clamped to zero.
pub fn gfu_upsample(wlow: &PlaneR, ylow: &PlaneR, yfull: &PlaneR, radius: usize, eps: f64) -> Result<PlaneR> {
    if radius < 1 || !(eps > 0.0) {
        return Err(Error::Config(format!("invalid guided filter radius {radius} / eps {eps}")));
    }
    let (lw, lh) = ylow.dims();
    let (fw, fh) = yfull.dims();
    if fw < lw || fh < lh {
        return Err(Error::StackShape(format!(
            "full-res guide {:?} smaller than low-res guide {:?}",
            yfull.dims(),
            ylow.dims()
        )));
    }
    let (a, b) = guided_coefficients(wlow, ylow, radius, eps)?;
    let a = resize_bilinear(&a, fw, fh)?;
    let b = resize_bilinear(&b, fw, fh)?;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .zip(yfull.data())
        .map(|((a, b), g)| (a * g + b).max(0.0))
        .collect();
    Ok(PlaneR::from_raw(fw, fh, data))
}
