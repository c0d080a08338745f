//! Stride-1, zero-padded "same" cross-correlation with dilation.
//!
//! Feature maps are `[channels, height, width]` row-major slices. Each tap is
//! applied as a shifted row-slice multiply-add, which keeps the inner loops
//! contiguous.

use super::params::Conv2d;
use super::tensor::Tensor4;
use crate::error::{Error, Result};

/// Valid output range `[lo, hi)` along one axis for a tap offset.
#[inline]
fn span(len: usize, offset: isize) -> (usize, usize) {
    let lo = (-offset).max(0) as usize;
    let hi = (len as isize - offset).clamp(0, len as isize) as usize;
    (lo, hi.max(lo))
}

#[inline]
fn offsets(kernel: usize, dilation: usize) -> impl Iterator<Item = isize> {
    let pad = (dilation * (kernel - 1) / 2) as isize;
    (0..kernel).map(move |k| (k * dilation) as isize - pad)
}

/// `out = conv(input) + bias`; `out` is overwritten.
pub(crate) fn conv_forward(input: &[f64], h: usize, w: usize, conv: &Conv2d, dilation: usize, out: &mut [f64]) {
    let hw = h * w;
    debug_assert_eq!(input.len(), conv.in_channels * hw);
    debug_assert_eq!(out.len(), conv.out_channels * hw);
    for co in 0..conv.out_channels {
        let dst = &mut out[co * hw..(co + 1) * hw];
        dst.fill(conv.bias[co]);
        for ci in 0..conv.in_channels {
            let src = &input[ci * hw..(ci + 1) * hw];
            for (ky, dy) in offsets(conv.kernel, dilation).enumerate() {
                let (y0, y1) = span(h, dy);
                for (kx, dx) in offsets(conv.kernel, dilation).enumerate() {
                    let wv = conv.weight[conv.index(co, ci, ky, kx)];
                    if wv == 0.0 {
                        continue;
                    }
                    let (x0, x1) = span(w, dx);
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let sx0 = (x0 as isize + dx) as usize;
                        let d = &mut dst[y * w + x0..y * w + x1];
                        let s = &src[sy * w + sx0..sy * w + sx0 + (x1 - x0)];
                        for (a, b) in d.iter_mut().zip(s) {
                            *a += wv * b;
                        }
                    }
                }
            }
        }
    }
}

/// Accumulates parameter gradients into `grad` and, when given, the input
/// gradient into `grad_input`.
pub(crate) fn conv_backward(
    input: &[f64],
    h: usize,
    w: usize,
    conv: &Conv2d,
    dilation: usize,
    grad_out: &[f64],
    grad: &mut Conv2d,
    mut grad_input: Option<&mut [f64]>,
) {
    let hw = h * w;
    for co in 0..conv.out_channels {
        let go = &grad_out[co * hw..(co + 1) * hw];
        grad.bias[co] += go.iter().sum::<f64>();
        for ci in 0..conv.in_channels {
            let src = &input[ci * hw..(ci + 1) * hw];
            for (ky, dy) in offsets(conv.kernel, dilation).enumerate() {
                let (y0, y1) = span(h, dy);
                for (kx, dx) in offsets(conv.kernel, dilation).enumerate() {
                    let (x0, x1) = span(w, dx);
                    let n = x1 - x0;
                    let widx = conv.index(co, ci, ky, kx);
                    let wv = conv.weight[widx];
                    let mut acc = 0.0;
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let sx0 = (x0 as isize + dx) as usize;
                        let g = &go[y * w + x0..y * w + x1];
                        let s = &src[sy * w + sx0..sy * w + sx0 + n];
                        acc += g.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                        if let Some(gi) = grad_input.as_deref_mut() {
                            let gi = &mut gi[ci * hw + sy * w + sx0..ci * hw + sy * w + sx0 + n];
                            for (a, b) in gi.iter_mut().zip(g) {
                                *a += wv * b;
                            }
                        }
                    }
                    grad.weight[widx] += acc;
                }
            }
        }
    }
}

/// Convolves every frame of `x` independently.
pub fn conv2d(x: &Tensor4, conv: &Conv2d, dilation: usize) -> Result<Tensor4> {
    if x.channels != conv.in_channels {
        return Err(Error::Shape(format!(
            "conv expects {} input channels, tensor has {}",
            conv.in_channels, x.channels
        )));
    }
    if dilation == 0 || conv.kernel % 2 == 0 {
        return Err(Error::Shape(format!("unsupported kernel {} / dilation {dilation}", conv.kernel)));
    }
    let mut out = Tensor4::zeros(x.frames, conv.out_channels, x.height, x.width);
    for k in 0..x.frames {
        conv_forward(x.frame_slice(k), x.height, x.width, conv, dilation, out.frame_slice_mut(k));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> Tensor4 {
        Tensor4::new(1, 1, h, w, (0..h * w).map(|i| f(i / w, i % w)).collect()).unwrap()
    }

    /// Direct summation over the padded window.
    fn oracle(x: &Tensor4, conv: &Conv2d, dil: usize) -> Vec<f64> {
        let (h, w) = (x.height as isize, x.width as isize);
        let pad = (dil * (conv.kernel - 1) / 2) as isize;
        let mut out = Vec::new();
        for co in 0..conv.out_channels {
            for y in 0..h {
                for xx in 0..w {
                    let mut s = conv.bias[co];
                    for ci in 0..conv.in_channels {
                        for ky in 0..conv.kernel {
                            for kx in 0..conv.kernel {
                                let sy = y + (ky * dil) as isize - pad;
                                let sx = xx + (kx * dil) as isize - pad;
                                if sy >= 0 && sy < h && sx >= 0 && sx < w {
                                    s += conv.weight[conv.index(co, ci, ky, kx)]
                                        * x.at(0, ci, sy as usize, sx as usize);
                                }
                            }
                        }
                    }
                    out.push(s);
                }
            }
        }
        out
    }

    #[test]
    fn identity_kernel() {
        let x = plane(5, 6, |y, x| (y * 6 + x) as f64 * 0.1);
        let out = conv2d(&x, &Conv2d::identity(1, 3), 1).unwrap();
        assert_eq!(out.data, x.data);
    }

    #[test]
    fn ones_kernel_zero_padding() {
        let x = plane(4, 4, |_, _| 0.5);
        let mut k = Conv2d::zeros(1, 1, 3);
        k.weight.fill(1.0);
        let out = conv2d(&x, &k, 1).unwrap();
        assert_eq!(out.at(0, 0, 1, 1), 9.0 * 0.5);
        assert_eq!(out.at(0, 0, 0, 0), 4.0 * 0.5);
        assert_eq!(out.at(0, 0, 0, 2), 6.0 * 0.5);
    }

    #[test]
    fn dilated_delta_has_taps_at_rate() {
        let x = plane(9, 9, |y, x| if (y, x) == (4, 4) { 1.0 } else { 0.0 });
        let mut k = Conv2d::zeros(1, 1, 3);
        k.weight.fill(1.0);
        let out = conv2d(&x, &k, 2).unwrap();
        let hot: Vec<(usize, usize)> =
            (0..81).filter(|i| out.data[*i] != 0.0).map(|i| (i / 9, i % 9)).collect();
        let expected: Vec<(usize, usize)> =
            [2, 4, 6].iter().flat_map(|&y| [2, 4, 6].iter().map(move |&x| (y, x))).collect();
        assert_eq!(hot, expected);
        assert_eq!(oracle(&x, &k, 2), out.data);
    }

    #[test]
    fn matches_direct_summation() {
        let x = Tensor4::new(1, 3, 7, 10, (0..210).map(|i| ((i * 37 % 17) as f64 - 8.0) / 8.0).collect()).unwrap();
        for dil in [1, 2, 4, 8] {
            let mut k = Conv2d::zeros(2, 3, 3);
            k.weight.iter_mut().enumerate().for_each(|(i, w)| *w = ((i * 13 % 7) as f64 - 3.0) / 5.0);
            k.bias = vec![0.25, -0.5];
            let out = conv2d(&x, &k, dil).unwrap();
            for (a, b) in out.data.iter().zip(oracle(&x, &k, dil)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_mismatch() {
        let x = plane(3, 3, |_, _| 0.0);
        assert!(matches!(conv2d(&x, &Conv2d::zeros(1, 2, 3), 1), Err(Error::Shape(_))));
    }

    #[test]
    fn backward_is_adjoint_of_forward() {
        // <conv(x), g> = <x, conv^T(g)> and d<conv(x), g>/dW matches a perturbation.
        let (h, w) = (6, 7);
        let x: Vec<f64> = (0..2 * h * w).map(|i| ((i * 29 % 23) as f64) / 23.0 - 0.4).collect();
        let g: Vec<f64> = (0..3 * h * w).map(|i| ((i * 17 % 19) as f64) / 19.0 - 0.5).collect();
        let mut k = Conv2d::zeros(3, 2, 3);
        k.weight.iter_mut().enumerate().for_each(|(i, v)| *v = ((i * 7 % 11) as f64 - 5.0) / 7.0);
        let mut out = vec![0.0; 3 * h * w];
        conv_forward(&x, h, w, &k, 2, &mut out);
        let lhs: f64 = out.iter().zip(&g).map(|(a, b)| a * b).sum();
        let mut grad = Conv2d::zeros(3, 2, 3);
        let mut gx = vec![0.0; 2 * h * w];
        conv_backward(&x, h, w, &k, 2, &g, &mut grad, Some(&mut gx));
        let rhs: f64 = x.iter().zip(&gx).map(|(a, b)| a * b).sum::<f64>()
            + k.bias.iter().zip(&grad.bias).map(|(a, b)| a * b).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-10);
        // linear in the weights too
        let wdot: f64 = k.weight.iter().zip(&grad.weight).map(|(a, b)| a * b).sum();
        assert!((lhs - wdot - k.bias.iter().zip(&grad.bias).map(|(a, b)| a * b).sum::<f64>()).abs() < 1e-10);
    }
}
