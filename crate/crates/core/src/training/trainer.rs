use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::mef_ssim::{MefSsimReference, DEFAULT_STABILITY_C, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::imgio::{ExposureStack, PlaneR};
use crate::lut_engine::lowres_luma;
use crate::network::{forward_trace, network_backward, GradientSet, NetworkHyper, NetworkParams, DEFAULT_CHANNELS};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub betas: (f64, f64),
    pub epochs: usize,
    pub seed: u64,
    /// MEF-SSIM patch side.
    pub window: usize,
    pub stability_c: f64,
    /// Sequences averaged per Adam step.
    pub batch: usize,
    pub channels: usize,
    /// Short side the inputs are downsampled towards.
    pub target_min: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            betas: (0.9, 0.999),
            epochs: 100,
            seed: 0,
            window: DEFAULT_WINDOW,
            stability_c: DEFAULT_STABILITY_C,
            batch: 1,
            channels: DEFAULT_CHANNELS,
            target_min: 128,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        let (b1, b2) = self.betas;
        if !((0.0..1.0).contains(&b1) && (0.0..1.0).contains(&b2)) {
            return Err(Error::Config(format!("betas must lie in [0,1), got {:?}", self.betas)));
        }
        if self.window < 3 || self.window % 2 == 0 {
            return Err(Error::Config(format!("window must be odd and >= 3, got {}", self.window)));
        }
        if !(self.stability_c >= 0.0 && self.stability_c.is_finite()) {
            return Err(Error::Config(format!("stability constant must be >= 0, got {}", self.stability_c)));
        }
        if self.batch == 0 {
            return Err(Error::Config("batch must be >= 1".into()));
        }
        if self.target_min == 0 {
            return Err(Error::Config("target_min must be >= 1".into()));
        }
        Ok(())
    }
}

/// One training sequence at network resolution with its cached MEF-SSIM
/// reference.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    planes: Vec<PlaneR>,
    reference: MefSsimReference,
}

impl TrainingSample {
    pub fn new(planes: Vec<PlaneR>, window: usize, stability_c: f64) -> Result<Self> {
        let reference = MefSsimReference::new(&planes, window, stability_c)?;
        Ok(Self { planes, reference })
    }

    /// Downsampled, 8-bit-requantized luma of `stack`, the same input the
    /// network sees at fusion time.
    pub fn from_stack(stack: &ExposureStack, cfg: &TrainConfig) -> Result<Self> {
        let low = lowres_luma(stack.frames(), cfg.target_min)?;
        Self::new(low.iter().map(|p| p.to_unit()).collect(), cfg.window, cfg.stability_c)
    }

    pub fn planes(&self) -> &[PlaneR] {
        &self.planes
    }

    pub fn k_frames(&self) -> usize {
        self.planes.len()
    }
}

pub fn prepare_dataset(dataset: &[ExposureStack], cfg: &TrainConfig) -> Result<Vec<TrainingSample>> {
    cfg.validate()?;
    let samples = dataset.iter().map(|s| TrainingSample::from_stack(s, cfg)).collect::<Result<Vec<_>>>()?;
    if let Some(first) = samples.first() {
        let k = first.k_frames();
        if let Some(bad) = samples.iter().find(|s| s.k_frames() != k) {
            return Err(Error::StackShape(format!("dataset mixes K={k} and K={}", bad.k_frames())));
        }
    }
    Ok(samples)
}

fn blend(planes: &[PlaneR], weights: &[f64]) -> PlaneR {
    let (w, h) = planes[0].dims();
    let hw = w * h;
    let mut out = vec![0.0; hw];
    for (k, p) in planes.iter().enumerate() {
        for (o, (y, wt)) in out.iter_mut().zip(p.data().iter().zip(&weights[k * hw..(k + 1) * hw])) {
            *o += y * wt;
        }
    }
    PlaneR::from_raw(w, h, out)
}

fn check_k(sample: &TrainingSample, params: &NetworkParams) -> Result<()> {
    if sample.k_frames() != params.k_frames() {
        return Err(Error::StackShape(format!(
            "network expects K={}, sample has {}",
            params.k_frames(),
            sample.k_frames()
        )));
    }
    Ok(())
}

/// `1 − MEF-SSIM` of the network's linear blend at sample resolution.
pub fn sample_loss(sample: &TrainingSample, params: &NetworkParams) -> Result<f64> {
    check_k(sample, params)?;
    let trace = forward_trace(&sample.planes, params)?;
    let fused = blend(&sample.planes, &trace.weights);
    Ok(1.0 - sample.reference.evaluate(fused.data(), None))
}

/// Loss and exact parameter gradients for one sample.
pub fn sample_gradients(sample: &TrainingSample, params: &NetworkParams) -> Result<(f64, GradientSet)> {
    check_k(sample, params)?;
    let trace = forward_trace(&sample.planes, params)?;
    let fused = blend(&sample.planes, &trace.weights);
    let (score, d_fused) = sample.reference.score_and_grad(&fused)?;
    let hw = d_fused.len();
    // dL/dW_k = -dS/dy · Y_k
    let mut d_weights = vec![0.0; sample.k_frames() * hw];
    for (k, p) in sample.planes.iter().enumerate() {
        for (d, (g, y)) in d_weights[k * hw..(k + 1) * hw].iter_mut().zip(d_fused.iter().zip(p.data())) {
            *d = -g * y;
        }
    }
    let grads = network_backward(&trace, params, &d_weights)?;
    if !grads.all_finite() {
        return Err(Error::Numerics("non-finite gradient".into()));
    }
    Ok((1.0 - score, grads))
}

/// Loss on low-res luma planes in `[0,1]`.
pub fn loss(ystack: &[PlaneR], params: &NetworkParams, cfg: &TrainConfig) -> Result<f64> {
    sample_loss(&TrainingSample::new(ystack.to_vec(), cfg.window, cfg.stability_c)?, params)
}

/// Loss and gradients on low-res luma planes in `[0,1]`.
pub fn gradients(ystack: &[PlaneR], params: &NetworkParams, cfg: &TrainConfig) -> Result<(f64, GradientSet)> {
    sample_gradients(&TrainingSample::new(ystack.to_vec(), cfg.window, cfg.stability_c)?, params)
}

pub fn mean_loss(samples: &[TrainingSample], params: &NetworkParams) -> Result<f64> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for s in samples {
        total += sample_loss(s, params)?;
    }
    Ok(total / samples.len() as f64)
}

/// Continues training `params` on prepared samples. `log` receives
/// `(epoch, mean loss over the epoch)`, epochs counted from 1.
pub fn train_samples(
    mut params: NetworkParams,
    samples: &[TrainingSample],
    cfg: &TrainConfig,
    mut log: impl FnMut(usize, f64),
) -> Result<NetworkParams> {
    cfg.validate()?;
    for s in samples {
        check_k(s, &params)?;
    }
    let mut state = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let mut acc = GradientSet::zeros_like(&params);
            for &i in chunk {
                let (l, g) = sample_gradients(&samples[i], &params)?;
                epoch_loss += l;
                acc.add_assign(&g);
            }
            acc.scale(1.0 / chunk.len() as f64);
            adam_step(&mut params, &acc, &mut state, cfg.learning_rate, cfg.betas);
        }
        if !params.all_finite() {
            return Err(Error::Numerics(format!("parameters diverged in epoch {epoch}")));
        }
        log(epoch, epoch_loss / samples.len().max(1) as f64);
    }
    Ok(params)
}

/// Seeded initialization followed by `cfg.epochs` passes over `dataset`.
pub fn train_logged(dataset: &[ExposureStack], cfg: &TrainConfig, log: impl FnMut(usize, f64)) -> Result<NetworkParams> {
    let samples = prepare_dataset(dataset, cfg)?;
    let k = samples.first().map(TrainingSample::k_frames).ok_or_else(|| Error::StackShape("empty dataset".into()))?;
    let params = NetworkParams::init(NetworkHyper::new(k, cfg.channels), cfg.seed)?;
    train_samples(params, &samples, cfg, log)
}

pub fn train(dataset: &[ExposureStack], cfg: &TrainConfig) -> Result<NetworkParams> {
    train_logged(dataset, cfg, |_, _| {})
}
