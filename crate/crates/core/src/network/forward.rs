//! Forward pass: stem conv, frame/channel attention, dilated inception with
//! spatial attention, output head and per-pixel softmax over frames.

use super::conv::conv_forward;
use super::params::{DisaBranch, NetworkParams};
use super::tensor::Tensor4;
use crate::error::{Error, Result};
use crate::imgio::{Plane8, PlaneR};
use crate::lut_engine::{FusionConfig, WeightMaps, WeightPredictor};

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// Intermediate values of the attention block.
#[derive(Debug, Clone)]
pub struct CfcaTrace {
    /// Spatial means `p^C`, `[K * C]`.
    pub pooled_channel: Vec<f64>,
    /// Channel MLP hidden pre-activations, `[K * C/4]`.
    pub hidden_channel: Vec<f64>,
    /// Channel gates, `[K * C]`.
    pub gate_channel: Vec<f64>,
    /// Spatial means after channel gating `p^F`, `[K * C]`.
    pub pooled_frame: Vec<f64>,
    /// Frame MLP hidden pre-activations, `[C * K]` (channel-major).
    pub hidden_frame: Vec<f64>,
    /// Frame gates, `[C * K]` (channel-major).
    pub gate_frame: Vec<f64>,
}

impl CfcaTrace {
    /// Combined gate applied to feature `(k, c)`.
    #[inline]
    pub fn gate(&self, k: usize, c: usize, k_frames: usize, channels: usize) -> f64 {
        self.gate_channel[k * channels + c] * self.gate_frame[c * k_frames + k]
    }
}

pub(crate) fn cfca_core(y: &[f64], k_frames: usize, hw: usize, params: &NetworkParams) -> (Vec<f64>, CfcaTrace) {
    let c_n = params.channels();
    let hidden_n = params.channel_fc1.out_features;
    let mut pooled_channel = vec![0.0; k_frames * c_n];
    let mut hidden_channel = vec![0.0; k_frames * hidden_n];
    let mut gate_channel = vec![0.0; k_frames * c_n];
    let mut pooled_frame = vec![0.0; k_frames * c_n];
    let mut act = vec![0.0; hidden_n];
    let mut z = vec![0.0; c_n];
    for k in 0..k_frames {
        let pc = &mut pooled_channel[k * c_n..(k + 1) * c_n];
        for (c, p) in pc.iter_mut().enumerate() {
            let off = (k * c_n + c) * hw;
            *p = y[off..off + hw].iter().sum::<f64>() / hw as f64;
        }
        let hidden = &mut hidden_channel[k * hidden_n..(k + 1) * hidden_n];
        params.channel_fc1.apply(pc, hidden);
        act.iter_mut().zip(hidden.iter()).for_each(|(a, h)| *a = relu(*h));
        params.channel_fc2.apply(&act, &mut z);
        for c in 0..c_n {
            let g = sigmoid(z[c]);
            gate_channel[k * c_n + c] = g;
            pooled_frame[k * c_n + c] = pc[c] * g;
        }
    }

    let mut hidden_frame = vec![0.0; c_n * k_frames];
    let mut gate_frame = vec![0.0; c_n * k_frames];
    let mut v = vec![0.0; k_frames];
    let mut act = vec![0.0; k_frames];
    let mut z = vec![0.0; k_frames];
    for c in 0..c_n {
        for k in 0..k_frames {
            v[k] = pooled_frame[k * c_n + c];
        }
        let hidden = &mut hidden_frame[c * k_frames..(c + 1) * k_frames];
        params.frame_fc1.apply(&v, hidden);
        act.iter_mut().zip(hidden.iter()).for_each(|(a, h)| *a = relu(*h));
        params.frame_fc2.apply(&act, &mut z);
        for k in 0..k_frames {
            gate_frame[c * k_frames + k] = sigmoid(z[k]);
        }
    }

    let trace = CfcaTrace { pooled_channel, hidden_channel, gate_channel, pooled_frame, hidden_frame, gate_frame };
    let mut x = vec![0.0; y.len()];
    for k in 0..k_frames {
        for c in 0..c_n {
            let off = (k * c_n + c) * hw;
            let gc = trace.gate_channel[k * c_n + c];
            let gf = trace.gate_frame[c * k_frames + k];
            for (o, i) in x[off..off + hw].iter_mut().zip(&y[off..off + hw]) {
                *o = i * gc * gf;
            }
        }
    }
    (x, trace)
}

/// Intermediate values of one DISA branch for one frame.
#[derive(Debug, Clone)]
pub struct BranchTrace {
    /// Dilated conv output before ReLU, `[C * HW]`.
    pub pre: Vec<f64>,
    /// Channel-mean and channel-max maps, `[2 * HW]`.
    pub pooled: Vec<f64>,
    /// Channel index achieving the max, `[HW]`.
    pub argmax: Vec<u32>,
    /// Spatial attention gate, `[HW]`.
    pub gate: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DisaTrace {
    pub branches: Vec<BranchTrace>,
    /// Gated branch outputs stacked along channels, `[branches * C * HW]`.
    pub concat: Vec<f64>,
}

fn branch_forward(x: &[f64], c_n: usize, h: usize, w: usize, branch: &DisaBranch, out: &mut [f64]) -> BranchTrace {
    let hw = h * w;
    let mut pre = vec![0.0; c_n * hw];
    conv_forward(x, h, w, &branch.conv, branch.rate, &mut pre);
    let mut pooled = vec![0.0; 2 * hw];
    let mut argmax = vec![0u32; hw];
    let (mean, max) = pooled.split_at_mut(hw);
    max.fill(f64::NEG_INFINITY);
    for c in 0..c_n {
        for i in 0..hw {
            let d = relu(pre[c * hw + i]);
            mean[i] += d;
            if d > max[i] {
                max[i] = d;
                argmax[i] = c as u32;
            }
        }
    }
    let inv = 1.0 / c_n as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    let mut att = vec![0.0; hw];
    conv_forward(&pooled, h, w, &branch.attention, 1, &mut att);
    let gate: Vec<f64> = att.into_iter().map(sigmoid).collect();
    for c in 0..c_n {
        for i in 0..hw {
            out[c * hw + i] = relu(pre[c * hw + i]) * gate[i];
        }
    }
    BranchTrace { pre, pooled, argmax, gate }
}

pub(crate) fn disa_core(x: &[f64], h: usize, w: usize, params: &NetworkParams) -> (Vec<f64>, DisaTrace) {
    let c_n = params.channels();
    let hw = h * w;
    let mut concat = vec![0.0; params.branches.len() * c_n * hw];
    let branches = params
        .branches
        .iter()
        .enumerate()
        .map(|(b, branch)| branch_forward(x, c_n, h, w, branch, &mut concat[b * c_n * hw..(b + 1) * c_n * hw]))
        .collect();
    let mut raw = vec![0.0; hw];
    conv_forward(&concat, h, w, &params.head, 1, &mut raw);
    (raw, DisaTrace { branches, concat })
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub k_frames: usize,
    pub height: usize,
    pub width: usize,
    /// Input luma, `[K * HW]`.
    pub input: Vec<f64>,
    /// Stem conv output before ReLU, `[K * C * HW]`.
    pub stem_pre: Vec<f64>,
    /// Stem features after ReLU.
    pub features: Vec<f64>,
    pub cfca: CfcaTrace,
    /// Attention-gated features, `[K * C * HW]`.
    pub gated: Vec<f64>,
    pub disa: Vec<DisaTrace>,
    /// Raw head outputs, `[K * HW]`.
    pub raw: Vec<f64>,
    /// Softmax over frames, `[K * HW]`.
    pub weights: Vec<f64>,
}

impl ForwardTrace {
    pub fn weight_maps(&self) -> WeightMaps {
        let hw = self.height * self.width;
        WeightMaps::from_raw(
            (0..self.k_frames)
                .map(|k| PlaneR::from_raw(self.width, self.height, self.weights[k * hw..(k + 1) * hw].to_vec()))
                .collect(),
        )
    }
}

fn check_input(ylow: &[PlaneR], params: &NetworkParams) -> Result<(usize, usize)> {
    if ylow.len() != params.k_frames() {
        return Err(Error::Shape(format!(
            "network built for K={} but got {} frames",
            params.k_frames(),
            ylow.len()
        )));
    }
    let dims = ylow[0].dims();
    if ylow.iter().any(|p| p.dims() != dims) {
        return Err(Error::Shape("network input planes differ in size".into()));
    }
    Ok(dims)
}

/// Runs the full network and keeps every intermediate.
pub fn forward_trace(ylow: &[PlaneR], params: &NetworkParams) -> Result<ForwardTrace> {
    let (w, h) = check_input(ylow, params)?;
    let k_n = params.k_frames();
    let c_n = params.channels();
    let hw = h * w;
    let input: Vec<f64> = ylow.iter().flat_map(|p| p.data().iter().copied()).collect();

    let mut stem_pre = vec![0.0; k_n * c_n * hw];
    for k in 0..k_n {
        conv_forward(&input[k * hw..(k + 1) * hw], h, w, &params.stem, 1, &mut stem_pre[k * c_n * hw..(k + 1) * c_n * hw]);
    }
    let features: Vec<f64> = stem_pre.iter().map(|&v| relu(v)).collect();
    let (gated, cfca) = cfca_core(&features, k_n, hw, params);

    let mut raw = vec![0.0; k_n * hw];
    let mut disa = Vec::with_capacity(k_n);
    for k in 0..k_n {
        let (r, t) = disa_core(&gated[k * c_n * hw..(k + 1) * c_n * hw], h, w, params);
        raw[k * hw..(k + 1) * hw].copy_from_slice(&r);
        disa.push(t);
    }

    let mut weights = vec![0.0; k_n * hw];
    for i in 0..hw {
        let max = (0..k_n).map(|k| raw[k * hw + i]).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for k in 0..k_n {
            let e = (raw[k * hw + i] - max).exp();
            weights[k * hw + i] = e;
            sum += e;
        }
        for k in 0..k_n {
            weights[k * hw + i] /= sum;
        }
    }
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerics("non-finite network output".into()));
    }
    Ok(ForwardTrace { k_frames: k_n, height: h, width: w, input, stem_pre, features, cfca, gated, disa, raw, weights })
}

/// Frame and channel attention over stem features `[K, C, H, W]`.
pub fn cfca_forward(y: &Tensor4, params: &NetworkParams) -> Result<Tensor4> {
    if y.frames != params.k_frames() || y.channels != params.channels() {
        return Err(Error::Shape(format!(
            "attention expects [{}, {}, H, W], got [{}, {}, ..]",
            params.k_frames(),
            params.channels(),
            y.frames,
            y.channels
        )));
    }
    let (x, _) = cfca_core(&y.data, y.frames, y.height * y.width, params);
    Tensor4::new(y.frames, y.channels, y.height, y.width, x)
}

/// Dilated inception with spatial attention for one frame `[1, C, H, W]`;
/// returns the raw (unnormalized) weight map.
pub fn disa_forward(x_k: &Tensor4, params: &NetworkParams) -> Result<PlaneR> {
    if x_k.frames != 1 || x_k.channels != params.channels() {
        return Err(Error::Shape(format!(
            "DISA expects [1, {}, H, W], got [{}, {}, ..]",
            params.channels(),
            x_k.frames,
            x_k.channels
        )));
    }
    let (raw, _) = disa_core(&x_k.data, x_k.height, x_k.width, params);
    PlaneR::new(x_k.width, x_k.height, raw)
}

/// Normalized weight maps for `K` low-res luma planes in `[0,1]`.
pub fn network_forward(ylow: &[PlaneR], params: &NetworkParams) -> Result<WeightMaps> {
    Ok(forward_trace(ylow, params)?.weight_maps())
}

impl WeightPredictor for NetworkParams {
    fn k_frames(&self) -> usize {
        self.hyper.k_frames
    }

    fn predict(&self, ylow: &[Plane8], _cfg: &FusionConfig) -> Result<WeightMaps> {
        let unit: Vec<PlaneR> = ylow.iter().map(Plane8::to_unit).collect();
        network_forward(&unit, self)
    }
}
