//! Network parameters, initialization and tensor views.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// 2D convolution kernel `[out, in, k, k]` plus per-output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel,
            weight: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }

    /// Center tap 1 on the matching channel, everything else 0.
    pub fn identity(channels: usize, kernel: usize) -> Self {
        let mut c = Self::zeros(channels, channels, kernel);
        let mid = kernel / 2;
        for ch in 0..channels {
            let idx = c.index(ch, ch, mid, mid);
            c.weight[idx] = 1.0;
        }
        c
    }

    #[inline]
    pub fn index(&self, out: usize, inp: usize, ky: usize, kx: usize) -> usize {
        ((out * self.in_channels + inp) * self.kernel + ky) * self.kernel + kx
    }

    fn weight_dims(&self) -> Vec<usize> {
        vec![self.out_channels, self.in_channels, self.kernel, self.kernel]
    }
}

/// Fully connected layer `out = W in + b`, `W` row-major `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub out_features: usize,
    pub in_features: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(out_features: usize, in_features: usize) -> Self {
        Self { out_features, in_features, weight: vec![0.0; out_features * in_features], bias: vec![0.0; out_features] }
    }

    pub(crate) fn apply(&self, input: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weight.chunks_exact(self.in_features).zip(&self.bias)) {
            *o = b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        }
    }
}

/// One dilated-inception branch: dilated conv followed by spatial attention.
#[derive(Debug, Clone, PartialEq)]
pub struct DisaBranch {
    pub rate: usize,
    pub conv: Conv2d,
    /// 7x7 kernel over the stacked channel-mean / channel-max maps.
    pub attention: Conv2d,
}

pub const SPATIAL_ATTENTION_KERNEL: usize = 7;
pub const DEFAULT_RATES: [usize; 3] = [2, 4, 8];
pub const DEFAULT_CHANNELS: usize = 24;

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkHyper {
    pub k_frames: usize,
    pub channels: usize,
    pub rates: Vec<usize>,
}

impl NetworkHyper {
    pub fn new(k_frames: usize, channels: usize) -> Self {
        Self { k_frames, channels, rates: DEFAULT_RATES.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_frames == 0 {
            return Err(Error::Shape("network needs K >= 1".into()));
        }
        if self.channels == 0 || self.channels % 4 != 0 {
            return Err(Error::Shape(format!("channel count {} must be a positive multiple of 4", self.channels)));
        }
        if self.rates.is_empty() || self.rates.contains(&0) {
            return Err(Error::Shape(format!("invalid dilation rates {:?}", self.rates)));
        }
        Ok(())
    }
}

/// Every learnable tensor of the weight-prediction network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub hyper: NetworkHyper,
    /// 3x3, 1 -> C
    pub stem: Conv2d,
    /// Channel attention MLP, C -> C/4 -> C.
    pub channel_fc1: Linear,
    pub channel_fc2: Linear,
    /// Frame attention MLP, K -> K -> K.
    pub frame_fc1: Linear,
    pub frame_fc2: Linear,
    pub branches: Vec<DisaBranch>,
    /// 3x3, (branches * C) -> 1
    pub head: Conv2d,
}

/// Borrowed view of one named tensor.
pub struct TensorRef<'a> {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: &'a [f64],
}

impl NetworkParams {
    /// All-zero parameters of the right shapes.
    pub fn zeros(hyper: NetworkHyper) -> Result<Self> {
        hyper.validate()?;
        let (k, c) = (hyper.k_frames, hyper.channels);
        let branches = hyper
            .rates
            .iter()
            .map(|&rate| DisaBranch {
                rate,
                conv: Conv2d::zeros(c, c, 3),
                attention: Conv2d::zeros(1, 2, SPATIAL_ATTENTION_KERNEL),
            })
            .collect();
        let head = Conv2d::zeros(1, c * hyper.rates.len(), 3);
        Ok(Self {
            stem: Conv2d::zeros(c, 1, 3),
            channel_fc1: Linear::zeros(c / 4, c),
            channel_fc2: Linear::zeros(c, c / 4),
            frame_fc1: Linear::zeros(k, k),
            frame_fc2: Linear::zeros(k, k),
            branches,
            head,
            hyper,
        })
    }

    /// Fan-in scaled uniform kernels `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, zero biases.
    pub fn init(hyper: NetworkHyper, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(hyper)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        params.for_each_weight_mut(|fan_in, w| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            w.iter_mut().for_each(|v| *v = rng.gen_range(-bound..bound));
        });
        Ok(params)
    }

    fn for_each_weight_mut(&mut self, mut f: impl FnMut(usize, &mut [f64])) {
        let conv_fan = |c: &Conv2d| c.in_channels * c.kernel * c.kernel;
        f(conv_fan(&self.stem), &mut self.stem.weight);
        for l in [&mut self.channel_fc1, &mut self.channel_fc2, &mut self.frame_fc1, &mut self.frame_fc2] {
            f(l.in_features, &mut l.weight);
        }
        for b in &mut self.branches {
            f(conv_fan(&b.conv), &mut b.conv.weight);
            f(conv_fan(&b.attention), &mut b.attention.weight);
        }
        f(conv_fan(&self.head), &mut self.head.weight);
    }

    pub fn k_frames(&self) -> usize {
        self.hyper.k_frames
    }

    pub fn channels(&self) -> usize {
        self.hyper.channels
    }

    /// Named tensors in checkpoint declaration order.
    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        fn conv<'a>(name: &str, c: &'a Conv2d, out: &mut Vec<TensorRef<'a>>) {
            out.push(TensorRef { name: format!("{name}.weight"), dims: c.weight_dims(), data: &c.weight });
            out.push(TensorRef { name: format!("{name}.bias"), dims: vec![c.out_channels], data: &c.bias });
        }
        let mut out = Vec::new();
        conv("stem", &self.stem, &mut out);
        for (name, l) in [
            ("channel_fc1", &self.channel_fc1),
            ("channel_fc2", &self.channel_fc2),
            ("frame_fc1", &self.frame_fc1),
            ("frame_fc2", &self.frame_fc2),
        ] {
            out.push(TensorRef { name: format!("{name}.weight"), dims: vec![l.out_features, l.in_features], data: &l.weight });
            out.push(TensorRef { name: format!("{name}.bias"), dims: vec![l.out_features], data: &l.bias });
        }
        for (i, b) in self.branches.iter().enumerate() {
            conv(&format!("branch{i}.conv"), &b.conv, &mut out);
            conv(&format!("branch{i}.attention"), &b.attention, &mut out);
        }
        conv("head", &self.head, &mut out);
        out
    }

    /// Mutable tensor slices in the same order as [`NetworkParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.stem.weight, &mut self.stem.bias];
        for l in [&mut self.channel_fc1, &mut self.channel_fc2, &mut self.frame_fc1, &mut self.frame_fc2] {
            out.push(&mut l.weight);
            out.push(&mut l.bias);
        }
        for b in &mut self.branches {
            out.push(&mut b.conv.weight);
            out.push(&mut b.conv.bias);
            out.push(&mut b.attention.weight);
            out.push(&mut b.attention.bias);
        }
        out.push(&mut self.head.weight);
        out.push(&mut self.head.bias);
        out
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// Reads scalar `i` in flattened declaration order.
    pub fn scalar(&self, mut i: usize) -> f64 {
        for t in self.tensors() {
            if i < t.data.len() {
                return t.data[i];
            }
            i -= t.data.len();
        }
        panic!("scalar index out of range");
    }

    pub fn scalar_mut(&mut self, mut i: usize) -> &mut f64 {
        for t in self.tensors_mut() {
            if i < t.len() {
                return &mut t[i];
            }
            i -= t.len();
        }
        panic!("scalar index out of range");
    }

    /// Name of the tensor holding flattened scalar `i`.
    pub fn scalar_name(&self, mut i: usize) -> String {
        for t in self.tensors() {
            if i < t.data.len() {
                return format!("{}[{i}]", t.name);
            }
            i -= t.data.len();
        }
        panic!("scalar index out of range");
    }

    /// Rounds every value to the nearest `f32`, the checkpoint precision.
    pub fn round_to_f32(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}

/// Gradient of a scalar loss with respect to every [`NetworkParams`] tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet(pub NetworkParams);

impl GradientSet {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self(NetworkParams::zeros(params.hyper.clone()).expect("hyper already validated"))
    }

    pub fn params(&self) -> &NetworkParams {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.tensors().iter().flat_map(|t| t.data.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.0.all_finite()
    }

    pub fn scalar(&self, i: usize) -> f64 {
        self.0.scalar(i)
    }

    /// Elementwise accumulation.
    pub fn add_assign(&mut self, other: &GradientSet) {
        let src = other.0.tensors();
        for (dst, s) in self.0.tensors_mut().into_iter().zip(src) {
            dst.iter_mut().zip(s.data).for_each(|(a, b)| *a += b);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.0.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }
}
