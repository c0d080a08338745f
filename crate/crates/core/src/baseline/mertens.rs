use super::pyramid::{default_levels, pyramid_blend};
use crate::error::{Error, Result};
use crate::imgio::{yuv_to_rgb_unit, ExposureStack, PlaneR, YuvImage};
use crate::lut_engine::{merge_uv, WeightMaps};

#[derive(Debug, Clone, PartialEq)]
pub struct MertensConfig {
    pub contrast_exp: f64,
    pub saturation_exp: f64,
    pub exposedness_exp: f64,
    /// Gaussian width of the well-exposedness term on `[0,1]` values.
    pub sigma: f64,
    /// Pyramid depth; `None` picks `floor(log2(min side)) - 2`.
    pub levels: Option<usize>,
}

impl Default for MertensConfig {
    fn default() -> Self {
        Self { contrast_exp: 1.0, saturation_exp: 1.0, exposedness_exp: 1.0, sigma: 0.2, levels: None }
    }
}

impl MertensConfig {
    pub fn validate(&self) -> Result<()> {
        let exps = [self.contrast_exp, self.saturation_exp, self.exposedness_exp];
        if exps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("exponents must be finite and >= 0, got {exps:?}")));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.levels == Some(0) {
            return Err(Error::Config("pyramid levels must be >= 1".into()));
        }
        Ok(())
    }
}

/// Unnormalized quality measure of one frame.
pub fn mertens_quality(frame: &YuvImage, cfg: &MertensConfig) -> PlaneR {
    let (w, h) = frame.dims();
    let y = frame.y.to_unit();
    let yd = y.data();
    let (u, v) = (frame.u.data(), frame.v.data());
    let two_s2 = 2.0 * cfg.sigma * cfg.sigma;
    let mut out = Vec::with_capacity(w * h);
    for py in 0..h {
        for px in 0..w {
            let i = py * w + px;
            let at = |x: usize, y: usize| yd[y * w + x];
            let lap = at(px.saturating_sub(1), py)
                + at((px + 1).min(w - 1), py)
                + at(px, py.saturating_sub(1))
                + at(px, (py + 1).min(h - 1))
                - 4.0 * yd[i];
            let contrast = lap.abs();
            let (r, g, b) = yuv_to_rgb_unit(yd[i], u[i] as f64 / 255.0, v[i] as f64 / 255.0);
            let mean = (r + g + b) / 3.0;
            let saturation = (((r - mean).powi(2) + (g - mean).powi(2) + (b - mean).powi(2)) / 3.0).sqrt();
            let exposedness = [r, g, b].iter().map(|c| (-(c - 0.5).powi(2) / two_s2).exp()).product::<f64>();
            out.push(
                contrast.powf(cfg.contrast_exp)
                    * saturation.powf(cfg.saturation_exp)
                    * exposedness.powf(cfg.exposedness_exp)
                    + 1e-12,
            );
        }
    }
    PlaneR::from_raw(w, h, out)
}

pub fn mertens_weights_frames(frames: &[YuvImage], cfg: &MertensConfig) -> Result<WeightMaps> {
    cfg.validate()?;
    let first = frames.first().ok_or_else(|| Error::StackShape("empty stack".into()))?;
    if frames.iter().any(|f| f.dims() != first.dims()) {
        return Err(Error::StackShape("frames differ in size".into()));
    }
    let mut q: Vec<PlaneR> = frames.iter().map(|f| mertens_quality(f, cfg)).collect();
    let n = q[0].data().len();
    for i in 0..n {
        let s: f64 = q.iter().map(|p| p.data()[i]).sum();
        for p in q.iter_mut() {
            p.data_mut()[i] /= s;
        }
    }
    WeightMaps::new(q)
}

/// Normalized contrast x saturation x well-exposedness weights.
pub fn mertens_weights(stack: &ExposureStack, cfg: &MertensConfig) -> Result<WeightMaps> {
    mertens_weights_frames(stack.frames(), cfg)
}

/// Classical exposure fusion: quality weights, pyramid-blended luma and
/// the same chroma merge as the LUT path.
pub fn fuse_mertens(stack: &ExposureStack, cfg: &MertensConfig) -> Result<YuvImage> {
    let weights = mertens_weights(stack, cfg)?;
    let (w, h) = (stack.width(), stack.height());
    let levels = cfg.levels.unwrap_or_else(|| default_levels(w, h));
    let y = pyramid_blend(&stack.luma_unit(), &weights, levels)?.to_u8();
    let u = merge_uv(&stack.frames().iter().map(|f| &f.u).collect::<Vec<_>>(), 128)?;
    let v = merge_uv(&stack.frames().iter().map(|f| &f.v).collect::<Vec<_>>(), 128)?;
    YuvImage::new(y, u, v)
}
