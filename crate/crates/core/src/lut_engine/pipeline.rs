//! The deployment path: low-res weights, upsampling, blending.

use rayon::prelude::*;

use super::{adapt_frame_count, blend_y, gfu_upsample, merge_uv, normalize_weights, query_weights, WeightMaps};
use crate::error::{Error, Result};
use crate::imgio::{choose_rate, downsample_bilinear, resize_bilinear, ExposureStack, LutMatrix, Plane8, PlaneR, YuvImage};

/// How low-resolution weight maps reach full resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Upsample {
    /// Guided-filter upsampling, luma as guide.
    #[default]
    Gfu,
    Bilinear,
}

impl std::str::FromStr for Upsample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gfu" => Ok(Self::Gfu),
            "bilinear" => Ok(Self::Bilinear),
            other => Err(Error::Config(format!("unknown upsampling mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub gfu_radius: usize,
    pub gfu_eps: f64,
    pub norm_eps: f64,
    /// Short side the low-resolution planes are brought down to.
    pub target_min: usize,
    pub upsample: Upsample,
    /// Upper bound on worker threads; 1 runs the single-threaded reference path.
    pub threads: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { gfu_radius: 2, gfu_eps: 1e-4, norm_eps: 1e-8, target_min: 128, upsample: Upsample::Gfu, threads: 1 }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gfu_radius < 1 {
            return Err(Error::Config("gfu_radius must be >= 1".into()));
        }
        if !(self.gfu_eps > 0.0) || !(self.norm_eps > 0.0) {
            return Err(Error::Config("gfu_eps and norm_eps must be > 0".into()));
        }
        if self.target_min < 1 || self.threads < 1 {
            return Err(Error::Config("target_min and threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// Anything that turns quantized low-res luma planes into normalized weight maps.
pub trait WeightPredictor {
    fn k_frames(&self) -> usize;

    fn predict(&self, ylow: &[Plane8], cfg: &FusionConfig) -> Result<WeightMaps>;
}

impl WeightPredictor for LutMatrix {
    fn k_frames(&self) -> usize {
        LutMatrix::k_frames(self)
    }

    fn predict(&self, ylow: &[Plane8], cfg: &FusionConfig) -> Result<WeightMaps> {
        normalize_weights(&query_weights(self, ylow)?, cfg.norm_eps)
    }
}

/// Fused image plus the weights that produced it.
#[derive(Debug, Clone)]
pub struct FusionOutput {
    pub image: YuvImage,
    /// Normalized low-resolution weights from the predictor.
    pub low_weights: WeightMaps,
    /// Normalized full-resolution blending weights.
    pub weights: WeightMaps,
}

fn run_maybe_parallel<T: Send, F: Fn(usize) -> Result<T> + Sync + Send>(
    threads: usize,
    n: usize,
    f: F,
) -> Result<Vec<T>> {
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Low-res luma planes for a stack, quantized to the 8-bit query domain.
pub fn lowres_luma(frames: &[YuvImage], target_min: usize) -> Result<Vec<Plane8>> {
    let (w, h) = frames[0].dims();
    let s = choose_rate(h, w, target_min);
    frames.iter().map(|f| Ok(downsample_bilinear(&f.y, s)?.to_u8())).collect()
}

/// Fuses frames already matched one-to-one with the predictor's rows.
pub fn fuse_frames<P: WeightPredictor + ?Sized>(
    frames: &[YuvImage],
    predictor: &P,
    cfg: &FusionConfig,
) -> Result<FusionOutput> {
    cfg.validate()?;
    if frames.len() != predictor.k_frames() {
        return Err(Error::StackShape(format!(
            "{} frames for a predictor with {} exposures",
            frames.len(),
            predictor.k_frames()
        )));
    }
    let (w, h) = frames[0].dims();
    if frames.iter().any(|f| f.dims() != (w, h)) {
        return Err(Error::StackShape("frames differ in size".into()));
    }

    let ylow = lowres_luma(frames, cfg.target_min)?;
    let low_weights = predictor.predict(&ylow, cfg)?;
    let yfull: Vec<PlaneR> = frames.iter().map(|f| f.y.to_unit()).collect();

    let upsampled = run_maybe_parallel(cfg.threads, frames.len(), |k| {
        let wlow = &low_weights.planes()[k];
        match cfg.upsample {
            Upsample::Gfu => gfu_upsample(wlow, &ylow[k].to_unit(), &yfull[k], cfg.gfu_radius, cfg.gfu_eps),
            Upsample::Bilinear => resize_bilinear(wlow, w, h),
        }
    })?;
    let weights = normalize_weights(&WeightMaps::from_raw(upsampled), cfg.norm_eps)?;

    let y = blend_y(&yfull, &weights)?.to_u8();
    let u = merge_uv(&frames.iter().map(|f| &f.u).collect::<Vec<_>>(), 128)?;
    let v = merge_uv(&frames.iter().map(|f| &f.v).collect::<Vec<_>>(), 128)?;
    Ok(FusionOutput { image: YuvImage::new(y, u, v)?, low_weights, weights })
}

/// Full pipeline with frame-count adaptation, keeping intermediate weights.
pub fn fuse_detailed<P: WeightPredictor + ?Sized>(
    stack: &ExposureStack,
    predictor: &P,
    cfg: &FusionConfig,
) -> Result<FusionOutput> {
    let adapted = adapt_frame_count(stack, predictor.k_frames())?;
    fuse_frames(adapted.frames(), predictor, cfg)
}

/// Fuses a stack with any weight predictor.
pub fn fuse_with<P: WeightPredictor + ?Sized>(stack: &ExposureStack, predictor: &P, cfg: &FusionConfig) -> Result<YuvImage> {
    Ok(fuse_detailed(stack, predictor, cfg)?.image)
}

/// Fuses a stack by LUT query.
pub fn fuse(stack: &ExposureStack, lut: &LutMatrix, cfg: &FusionConfig) -> Result<YuvImage> {
    fuse_with(stack, lut, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> YuvImage {
        let y: Vec<u8> = (0..w * h).map(|i| f(i % w, i / w)).collect();
        let u: Vec<u8> = (0..w * h).map(|i| 100 + (i % 50) as u8).collect();
        let v: Vec<u8> = (0..w * h).map(|i| 150 - (i % 40) as u8).collect();
        YuvImage::new(Plane8::new(w, h, y).unwrap(), Plane8::new(w, h, u).unwrap(), Plane8::new(w, h, v).unwrap())
            .unwrap()
    }

    #[test]
    fn single_frame_is_identity() {
        let f = frame(300, 260, |x, y| ((x * 7 + y * 3) % 256) as u8);
        let stack = ExposureStack::new(vec![f.clone()], vec![0.0]).unwrap();
        let lut = LutMatrix::from_fn(1, |_, v| 0.5 + (v as f32 / 255.0)).unwrap();
        for upsample in [Upsample::Gfu, Upsample::Bilinear] {
            let cfg = FusionConfig { upsample, ..Default::default() };
            assert_eq!(fuse(&stack, &lut, &cfg).unwrap(), f);
        }
    }

    #[test]
    fn identical_frames_reproduce_input() {
        let f = frame(257, 200, |x, y| ((x ^ y) % 256) as u8);
        let stack = ExposureStack::new(vec![f.clone(), f.clone(), f.clone()], vec![-2.0, 0.0, 2.0]).unwrap();
        let lut = LutMatrix::from_fn(3, |k, v| ((k + 1) * (v + 3)) as f32 / 256.0).unwrap();
        let out = fuse(&stack, &lut, &FusionConfig::default()).unwrap();
        for (a, b) in out.y.data().iter().zip(f.y.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
        assert_eq!(out.u, f.u);
        assert_eq!(out.v, f.v);
    }

    #[test]
    fn k_mismatch_is_adapted() {
        let frames: Vec<_> = (0..6).map(|i| frame(64, 64, move |x, _| (x * 4 + i * 10) as u8)).collect();
        let stack = ExposureStack::new(frames, (0..6).map(|i| i as f64).collect()).unwrap();
        let lut = LutMatrix::from_fn(3, |_, _| 1.0).unwrap();
        assert_eq!(fuse(&stack, &lut, &FusionConfig::default()).unwrap().dims(), (64, 64));
    }

    #[test]
    fn parallel_matches_reference() {
        let frames: Vec<_> = (0..3).map(|i| frame(200, 150, move |x, y| ((x + y * 2) * (i + 1) % 256) as u8)).collect();
        let stack = ExposureStack::new(frames, vec![-1.0, 0.0, 1.0]).unwrap();
        let lut = LutMatrix::from_fn(3, |k, v| 1.0 + ((v as f32 - 128.0) * (k as f32 - 1.0)).abs() / 128.0).unwrap();
        let one = fuse_detailed(&stack, &lut, &FusionConfig::default()).unwrap();
        let four = fuse_detailed(&stack, &lut, &FusionConfig { threads: 4, ..Default::default() }).unwrap();
        assert_eq!(one.image, four.image);
        for (a, b) in one.weights.planes().iter().zip(four.weights.planes()) {
            assert!(a.data().iter().zip(b.data()).all(|(x, y)| (x - y).abs() <= 1e-6));
        }
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = FusionConfig { gfu_eps: 0.0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
