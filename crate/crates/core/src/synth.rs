//! Deterministic synthetic HDR scenes rendered as bracketed exposures.
//!
//! A scene is a linear RGB radiance map: a tilted illumination ramp spanning
//! several stops, a few bright and dark blobs, sinusoidal texture and
//! per-pixel grain. Each exposure scales radiance by `2^ev`, clips at 1 and
//! applies a 1/2.2 gamma before 8-bit quantization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imgio::{unit_to_u8, ExposureStack, YuvImage};

pub const DEFAULT_EVS: [f64; 3] = [-2.0, 0.0, 2.0];

/// Linear RGB radiance, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Radiance {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[f64; 3]>,
}

struct Blob {
    cx: f64,
    cy: f64,
    radius: f64,
    stops: f64,
    tint: [f64; 3],
}

pub fn synthetic_radiance(width: usize, height: usize, seed: u64) -> Result<Radiance> {
    if width == 0 || height == 0 {
        return Err(Error::StackShape(format!("cannot synthesize a {width}x{height} scene")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let span = rng.gen_range(5.0..8.0);
    let mut tint = || [rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3)];
    let base_tint = tint();
    let blob_tints: Vec<[f64; 3]> = (0..4).map(|_| tint()).collect();
    let blobs: Vec<Blob> = blob_tints
        .into_iter()
        .map(|tint| Blob {
            cx: rng.gen_range(0.1..0.9),
            cy: rng.gen_range(0.1..0.9),
            radius: rng.gen_range(0.08..0.25),
            stops: rng.gen_range(-3.0..3.0),
            tint,
        })
        .collect();
    let freqs: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(2.0..10.0),
                rng.gen_range(2.0..10.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.1..0.3),
            )
        })
        .collect();
    let (ct, st) = (theta.cos(), theta.sin());
    let mut rgb = Vec::with_capacity(width * height);
    for y in 0..height {
        let v = (y as f64 + 0.5) / height as f64;
        for x in 0..width {
            let u = (x as f64 + 0.5) / width as f64;
            let mut stops = span * ((u - 0.5) * ct + (v - 0.5) * st);
            let mut color = base_tint;
            for b in &blobs {
                let d2 = ((u - b.cx).powi(2) + (v - b.cy).powi(2)) / (b.radius * b.radius);
                let m = (-d2).exp();
                stops += b.stops * m;
                for c in 0..3 {
                    color[c] += (b.tint[c] - color[c]) * m;
                }
            }
            let mut texture = 1.0;
            for &(fu, fv, phase, amp) in &freqs {
                texture += amp * (std::f64::consts::TAU * (fu * u + fv * v) + phase).sin();
            }
            texture *= 1.0 + rng.gen_range(-0.08..0.08);
            let lum = 0.18 * stops.exp2() * texture.max(0.05);
            rgb.push([lum * color[0], lum * color[1], lum * color[2]]);
        }
    }
    Ok(Radiance { width, height, rgb })
}

/// Clipped, gamma-encoded 8-bit exposure at `ev` stops.
pub fn render_exposure(radiance: &Radiance, ev: f64) -> Result<YuvImage> {
    let gain = ev.exp2();
    let bytes: Vec<u8> = radiance
        .rgb
        .iter()
        .flat_map(|px| px.map(|c| unit_to_u8((c * gain).clamp(0.0, 1.0).powf(1.0 / 2.2))))
        .collect();
    YuvImage::from_rgb8(radiance.width, radiance.height, &bytes)
}

pub fn synthetic_stack(width: usize, height: usize, evs: &[f64], seed: u64) -> Result<ExposureStack> {
    let radiance = synthetic_radiance(width, height, seed)?;
    let frames = evs.iter().map(|&ev| render_exposure(&radiance, ev)).collect::<Result<Vec<_>>>()?;
    ExposureStack::new(frames, evs.to_vec())
}

/// `count` independent scenes, seeds `seed, seed + 1, ...`.
pub fn synthetic_dataset(count: usize, width: usize, height: usize, evs: &[f64], seed: u64) -> Result<Vec<ExposureStack>> {
    (0..count as u64).map(|i| synthetic_stack(width, height, evs, seed.wrapping_add(i))).collect()
}
