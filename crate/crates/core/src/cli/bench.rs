//! Wall-clock comparison of the LUT path, the network path and the
//! classical baseline on synthetic stacks.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use crate::baseline::{fuse_mertens, MertensConfig};
use crate::error::{Error, Result};
use crate::imgio::{ExposureStack, LutMatrix};
use crate::lut_engine::{fuse_with, FusionConfig, Upsample};
use crate::network::{NetworkHyper, NetworkParams};
use crate::synth::{synthetic_stack, DEFAULT_EVS};

pub const MIN_REPEATS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchPath {
    Lut,
    Network,
    Mertens,
}

impl FromStr for BenchPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lut" => Ok(Self::Lut),
            "network" => Ok(Self::Network),
            "mertens" => Ok(Self::Mertens),
            other => Err(Error::Config(format!("unknown bench path {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub resolutions: Vec<usize>,
    pub repeat: usize,
    pub paths: Vec<BenchPath>,
    pub threads: usize,
    /// Network width for the network path.
    pub channels: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            resolutions: vec![512, 1024, 2048],
            repeat: 10,
            paths: vec![BenchPath::Lut, BenchPath::Network, BenchPath::Mertens],
            threads: 1,
            channels: crate::network::DEFAULT_CHANNELS,
            seed: 0,
        }
    }
}

/// Timing summary of one method at one resolution, in milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub method: String,
    pub resolution: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub repeats: usize,
    pub threads: usize,
}

/// Smooth per-exposure weight curves: dark frames favored in highlights,
/// bright frames in shadows.
pub fn demo_lut(k: usize) -> Result<LutMatrix> {
    LutMatrix::from_fn(k, |row, v| {
        let center = 1.0 - (row as f32 + 0.5) / k as f32;
        let x = v as f32 / 255.0 - center;
        (-x * x / 0.08).exp() + 1e-3
    })
}

pub fn time_repeated(repeat: usize, mut f: impl FnMut() -> Result<()>) -> Result<Vec<f64>> {
    (0..repeat)
        .map(|_| {
            let t = Instant::now();
            f()?;
            Ok(t.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

pub fn summarize(method: &str, resolution: usize, threads: usize, mut times: Vec<f64>) -> BenchResult {
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let median = if n % 2 == 1 { times[n / 2] } else { 0.5 * (times[n / 2 - 1] + times[n / 2]) };
    BenchResult {
        method: method.to_string(),
        resolution,
        median_ms: median,
        mean_ms: times.iter().sum::<f64>() / n as f64,
        min_ms: times[0],
        repeats: n,
        threads,
    }
}

fn bench_stack(res: usize, seed: u64) -> Result<ExposureStack> {
    synthetic_stack(res, res, &DEFAULT_EVS, seed)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchResult>> {
    if cfg.repeat < MIN_REPEATS {
        return Err(Error::Config(format!("--repeat must be >= {MIN_REPEATS}, got {}", cfg.repeat)));
    }
    if cfg.resolutions.is_empty() || cfg.resolutions.contains(&0) {
        return Err(Error::Config("resolutions must be positive".into()));
    }
    let lut = demo_lut(DEFAULT_EVS.len())?;
    let net = NetworkParams::init(NetworkHyper::new(DEFAULT_EVS.len(), cfg.channels), cfg.seed)?;
    let mut out = Vec::new();
    for &res in &cfg.resolutions {
        let stack = bench_stack(res, cfg.seed)?;
        for path in &cfg.paths {
            match path {
                BenchPath::Mertens => {
                    let mcfg = MertensConfig::default();
                    let times = time_repeated(cfg.repeat, || fuse_mertens(&stack, &mcfg).map(drop))?;
                    out.push(summarize("mertens", res, cfg.threads, times));
                }
                BenchPath::Lut | BenchPath::Network => {
                    for upsample in [Upsample::Gfu, Upsample::Bilinear] {
                        let fcfg = FusionConfig { upsample, threads: cfg.threads, ..Default::default() };
                        let times = match path {
                            BenchPath::Lut => time_repeated(cfg.repeat, || fuse_with(&stack, &lut, &fcfg).map(drop))?,
                            _ => time_repeated(cfg.repeat, || fuse_with(&stack, &net, &fcfg).map(drop))?,
                        };
                        let base = if *path == BenchPath::Lut { "lut" } else { "network" };
                        let label = match upsample {
                            Upsample::Gfu => format!("{base}+gfu"),
                            Upsample::Bilinear => format!("{base}+bilinear"),
                        };
                        out.push(summarize(&label, res, cfg.threads, times));
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn bench_table(results: &[BenchResult]) -> String {
    let mut s = String::from("method\tresolution\tmedian_ms\tmean_ms\tmin_ms\trepeats\tthreads\n");
    for r in results {
        let _ = writeln!(
            s,
            "{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{}\t{}",
            r.method, r.resolution, r.median_ms, r.mean_ms, r.min_ms, r.repeats, r.threads
        );
    }
    s
}
