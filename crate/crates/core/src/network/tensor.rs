use crate::error::{Error, Result};

/// Dense `[frames, channels, height, width]` tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub frames: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn new(frames: usize, channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != frames * channels * height * width {
            return Err(Error::Shape(format!(
                "tensor [{frames}, {channels}, {height}, {width}] needs {} values, got {}",
                frames * channels * height * width,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerics("non-finite tensor value".into()));
        }
        Ok(Self { frames, channels, height, width, data })
    }

    pub fn zeros(frames: usize, channels: usize, height: usize, width: usize) -> Self {
        Self { frames, channels, height, width, data: vec![0.0; frames * channels * height * width] }
    }

    pub fn frame_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn frame_slice(&self, k: usize) -> &[f64] {
        let n = self.frame_len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn frame_slice_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.frame_len();
        &mut self.data[k * n..(k + 1) * n]
    }

    /// Copy of a single frame as a one-frame tensor.
    pub fn frame(&self, k: usize) -> Tensor4 {
        Tensor4 {
            frames: 1,
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.frame_slice(k).to_vec(),
        }
    }

    #[inline]
    pub fn at(&self, k: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[((k * self.channels + c) * self.height + y) * self.width + x]
    }
}
