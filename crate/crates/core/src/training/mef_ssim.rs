//! MEF-SSIM: structural similarity between a fused image and a patchwise
//! "desired" image built from the exposure stack.
//!
//! The desired patch depends only on the stack, so [`MefSsimReference`]
//! builds it once and then scores (and differentiates) any number of fused
//! candidates.

use crate::error::{Error, Result};
use crate::imgio::PlaneR;

/// Default patch side.
pub const DEFAULT_WINDOW: usize = 7;
/// Default stability constant for `[0,1]` intensities.
pub const DEFAULT_STABILITY_C: f64 = 0.03 * 0.03;

/// Patch norms below this are treated as flat.
const FLAT_NORM: f64 = 1e-10;

/// Precomputed desired patches of one exposure stack.
#[derive(Debug, Clone)]
pub struct MefSsimReference {
    width: usize,
    height: usize,
    window: usize,
    c2: f64,
    /// Desired patches back to back, `window²` values each. Empty slots for
    /// degenerate patches are zero.
    desired: Vec<f64>,
    desired_norm2: Vec<f64>,
    degenerate: Vec<bool>,
}

fn check_window(width: usize, height: usize, window: usize) -> Result<()> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Config(format!("MEF-SSIM window must be odd, got {window}")));
    }
    if window > width || window > height {
        return Err(Error::Shape(format!("window {window} larger than {width}x{height} image")));
    }
    Ok(())
}

struct Scratch {
    centered: Vec<f64>,
    sbar: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { centered: vec![0.0; n], sbar: vec![0.0; n] }
    }
}

/// Writes the desired patch at `(px, py)` into `out` and returns its squared
/// norm, or `None` for a flat patch.
fn desired_patch_into(
    ystack: &[PlaneR],
    width: usize,
    window: usize,
    px: usize,
    py: usize,
    scratch: &mut Scratch,
    out: &mut [f64],
) -> Option<f64> {
    let n = window * window;
    let Scratch { centered, sbar } = scratch;
    sbar.fill(0.0);
    let mut c_sum = 0.0;
    let mut c_max: f64 = 0.0;
    for plane in ystack {
        let data = plane.data();
        let mut mean = 0.0;
        for dy in 0..window {
            let row = &data[(py + dy) * width + px..(py + dy) * width + px + window];
            centered[dy * window..(dy + 1) * window].copy_from_slice(row);
            mean += row.iter().sum::<f64>();
        }
        mean /= n as f64;
        let mut norm2 = 0.0;
        for v in centered.iter_mut() {
            *v -= mean;
            norm2 += *v * *v;
        }
        let c = norm2.sqrt();
        if c < FLAT_NORM {
            continue;
        }
        c_sum += c;
        c_max = c_max.max(c);
        sbar.iter_mut().zip(centered.iter()).for_each(|(s, x)| *s += x);
    }
    let s_norm = if c_sum > 0.0 { sbar.iter().map(|v| v * v).sum::<f64>().sqrt() / c_sum } else { 0.0 };
    if s_norm < FLAT_NORM {
        return None;
    }
    // x̂ = ĉ · s̄/‖s̄‖, where s̄ = Σ x̃_k / Σ c_k
    let scale = c_max / (s_norm * c_sum);
    out.iter_mut().zip(sbar.iter()).for_each(|(o, s)| *o = s * scale);
    Some(out.iter().map(|v| v * v).sum())
}

/// Copies the patch at `(px, py)` into `out` with its mean removed.
fn centered_patch(y: &[f64], width: usize, window: usize, px: usize, py: usize, out: &mut [f64]) {
    let mut mean = 0.0;
    for dy in 0..window {
        let row = &y[(py + dy) * width + px..(py + dy) * width + px + window];
        out[dy * window..(dy + 1) * window].copy_from_slice(row);
        mean += row.iter().sum::<f64>();
    }
    mean /= out.len() as f64;
    out.iter_mut().for_each(|v| *v -= mean);
}

/// `(2⟨x̂,ỹ⟩ + C) / (‖x̂‖² + ‖ỹ‖² + C)` plus its numerator and denominator.
fn patch_score(desired: &[f64], desired_norm2: f64, yt: &[f64], c2: f64) -> (f64, f64) {
    let dot: f64 = desired.iter().zip(yt).map(|(a, b)| a * b).sum();
    let y2: f64 = yt.iter().map(|v| v * v).sum();
    (2.0 * dot + c2, desired_norm2 + y2 + c2)
}

impl MefSsimReference {
    pub fn new(ystack: &[PlaneR], window: usize, stability_c: f64) -> Result<Self> {
        let first = ystack.first().ok_or_else(|| Error::Shape("MEF-SSIM needs at least one frame".into()))?;
        let (width, height) = first.dims();
        if ystack.iter().any(|p| p.dims() != (width, height)) {
            return Err(Error::Shape("MEF-SSIM frames differ in size".into()));
        }
        if !(stability_c >= 0.0 && stability_c.is_finite()) {
            return Err(Error::Config(format!("stability constant must be finite and >= 0, got {stability_c}")));
        }
        check_window(width, height, window)?;
        let n = window * window;
        let (pw, ph) = (width - window + 1, height - window + 1);
        let mut desired = vec![0.0; pw * ph * n];
        let mut desired_norm2 = vec![0.0; pw * ph];
        let mut degenerate = vec![false; pw * ph];
        let mut scratch = Scratch::new(n);
        for py in 0..ph {
            for px in 0..pw {
                let idx = py * pw + px;
                match desired_patch_into(ystack, width, window, px, py, &mut scratch, &mut desired[idx * n..(idx + 1) * n]) {
                    Some(norm2) => desired_norm2[idx] = norm2,
                    None => degenerate[idx] = true,
                }
            }
        }
        Ok(Self { width, height, window, c2: stability_c * n as f64, desired, desired_norm2, degenerate })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Desired patch at top-left corner `(px, py)`, or `None` when flat.
    pub fn desired_patch(&self, px: usize, py: usize) -> Option<&[f64]> {
        let pw = self.width - self.window + 1;
        let idx = py * pw + px;
        let n = self.window * self.window;
        (!self.degenerate[idx]).then(|| &self.desired[idx * n..(idx + 1) * n])
    }

    pub fn score(&self, fused: &PlaneR) -> Result<f64> {
        self.check(fused)?;
        Ok(self.evaluate(fused.data(), None))
    }

    /// Score plus its gradient with respect to every fused pixel.
    pub fn score_and_grad(&self, fused: &PlaneR) -> Result<(f64, Vec<f64>)> {
        self.check(fused)?;
        let mut grad = vec![0.0; fused.data().len()];
        let s = self.evaluate(fused.data(), Some(&mut grad));
        Ok((s, grad))
    }

    fn check(&self, fused: &PlaneR) -> Result<()> {
        if fused.dims() != (self.width, self.height) {
            return Err(Error::Shape(format!(
                "fused image is {:?}, stack is {:?}",
                fused.dims(),
                (self.width, self.height)
            )));
        }
        Ok(())
    }

    pub(crate) fn evaluate(&self, y: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let (w, win) = (self.width, self.window);
        let n = win * win;
        let (pw, ph) = (w - win + 1, self.height - win + 1);
        let inv_patches = 1.0 / (pw * ph) as f64;
        let mut yt = vec![0.0; n];
        let mut total = 0.0;
        for py in 0..ph {
            for px in 0..pw {
                let idx = py * pw + px;
                if self.degenerate[idx] {
                    total += 1.0;
                    continue;
                }
                centered_patch(y, w, win, px, py, &mut yt);
                let xh = &self.desired[idx * n..(idx + 1) * n];
                let (num, den) = patch_score(xh, self.desired_norm2[idx], &yt, self.c2);
                total += num / den;
                if let Some(g) = grad.as_deref_mut() {
                    // d(num/den)/dỹ, then project through the mean removal
                    let a = 2.0 / den * inv_patches;
                    let b = 2.0 * num / (den * den) * inv_patches;
                    let mut gmean = 0.0;
                    for i in 0..n {
                        yt[i] = a * xh[i] - b * yt[i];
                        gmean += yt[i];
                    }
                    gmean /= n as f64;
                    for dy in 0..win {
                        let dst = &mut g[(py + dy) * w + px..(py + dy) * w + px + win];
                        for (d, v) in dst.iter_mut().zip(&yt[dy * win..(dy + 1) * win]) {
                            *d += v - gmean;
                        }
                    }
                }
            }
        }
        total * inv_patches
    }
}

/// Mean MEF-SSIM of `fused` against `ystack` over all valid patches.
///
/// Streams over patches without caching, so memory stays flat at any size.
pub fn mef_ssim_score(ystack: &[PlaneR], fused: &PlaneR, window: usize, stability_c: f64) -> Result<f64> {
    let first = ystack.first().ok_or_else(|| Error::Shape("MEF-SSIM needs at least one frame".into()))?;
    let (width, height) = first.dims();
    if ystack.iter().any(|p| p.dims() != (width, height)) || fused.dims() != (width, height) {
        return Err(Error::Shape("MEF-SSIM inputs differ in size".into()));
    }
    if !(stability_c >= 0.0 && stability_c.is_finite()) {
        return Err(Error::Config(format!("stability constant must be finite and >= 0, got {stability_c}")));
    }
    check_window(width, height, window)?;
    let n = window * window;
    let c2 = stability_c * n as f64;
    let mut scratch = Scratch::new(n);
    let mut desired = vec![0.0; n];
    let mut yt = vec![0.0; n];
    let (pw, ph) = (width - window + 1, height - window + 1);
    let mut total = 0.0;
    for py in 0..ph {
        for px in 0..pw {
            total += match desired_patch_into(ystack, width, window, px, py, &mut scratch, &mut desired) {
                Some(norm2) => {
                    centered_patch(fused.data(), width, window, px, py, &mut yt);
                    let (num, den) = patch_score(&desired, norm2, &yt, c2);
                    num / den
                }
                None => 1.0,
            };
        }
    }
    Ok(total / (pw * ph) as f64)
}
