//! Planar image containers.

use crate::error::{Error, Result};

/// Rounds half-up and clamps into the 8-bit range.
#[inline]
pub fn quantize_u8(value: f64) -> u8 {
    (value + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Maps a `[0,1]` real intensity onto the 8-bit grid, round-half-up.
#[inline]
pub fn unit_to_u8(value: f64) -> u8 {
    quantize_u8(value * 255.0)
}

/// A single 8-bit channel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane8 {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Converts to reals in `[0,1]`.
    pub fn to_unit(&self) -> PlaneR {
        PlaneR {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v as f64 / 255.0).collect(),
        }
    }
}

/// A single real-valued channel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneR {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl PlaneR {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerics(format!("non-finite plane value at index {i}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Skips the finiteness scan; callers guarantee finite data of the right length.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Quantizes `[0,1]` reals to 8-bit, round-half-up.
    pub fn to_u8(&self) -> Plane8 {
        Plane8 {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| unit_to_u8(v)).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::StackShape(format!("empty plane {width}x{height}")));
    }
    if width * height != len {
        return Err(Error::StackShape(format!(
            "plane {width}x{height} needs {} samples, got {len}",
            width * height
        )));
    }
    Ok(())
}

/// Full-range planar YUV 4:4:4 image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YuvImage {
    pub y: Plane8,
    pub u: Plane8,
    pub v: Plane8,
}

impl YuvImage {
    pub fn new(y: Plane8, u: Plane8, v: Plane8) -> Result<Self> {
        if y.dims() != u.dims() || y.dims() != v.dims() {
            return Err(Error::StackShape(format!(
                "yuv planes disagree: y {:?}, u {:?}, v {:?}",
                y.dims(),
                u.dims(),
                v.dims()
            )));
        }
        Ok(Self { y, u, v })
    }

    /// Grayscale lift: chroma planes are neutral.
    pub fn from_luma(y: Plane8) -> Self {
        let (w, h) = y.dims();
        let neutral = Plane8 { width: w, height: h, data: vec![128; w * h] };
        Self { y, u: neutral.clone(), v: neutral }
    }

    /// Builds from interleaved 8-bit RGB.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::StackShape(format!(
                "rgb buffer of {} bytes does not match {width}x{height}",
                rgb.len()
            )));
        }
        let n = width * height;
        let (mut y, mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for px in rgb.chunks_exact(3) {
            let (yy, uu, vv) = super::color::rgb_to_yuv(px[0], px[1], px[2]);
            y.push(yy);
            u.push(uu);
            v.push(vv);
        }
        Ok(Self {
            y: Plane8::new(width, height, y)?,
            u: Plane8::new(width, height, u)?,
            v: Plane8::new(width, height, v)?,
        })
    }

    /// Interleaved 8-bit RGB.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.y.data.len() * 3);
        for ((&y, &u), &v) in self.y.data.iter().zip(&self.u.data).zip(&self.v.data) {
            let (r, g, b) = super::color::yuv_to_rgb(y, u, v);
            out.extend_from_slice(&[r, g, b]);
        }
        out
    }

    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }

    pub fn dims(&self) -> (usize, usize) {
        self.y.dims()
    }
}

/// `K` co-registered frames ordered by exposure value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureStack {
    frames: Vec<YuvImage>,
    evs: Vec<f64>,
}

impl ExposureStack {
    /// Validates shared dimensions and strictly increasing, finite EVs.
    pub fn new(frames: Vec<YuvImage>, evs: Vec<f64>) -> Result<Self> {
        if evs.windows(2).any(|w| w[1] <= w[0]) || evs.iter().any(|e| !e.is_finite()) {
            return Err(Error::Metadata(format!("exposure values must be finite and strictly increasing: {evs:?}")));
        }
        Self::from_parts(frames, evs)
    }

    /// Like [`ExposureStack::new`] but only requires nondecreasing EVs, as
    /// produced by frame-count adaptation when frames get duplicated.
    pub(crate) fn from_parts(frames: Vec<YuvImage>, evs: Vec<f64>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::StackShape("exposure stack has no frames".into()));
        }
        if frames.len() != evs.len() {
            return Err(Error::Metadata(format!("{} frames but {} exposure values", frames.len(), evs.len())));
        }
        if evs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Metadata(format!("exposure values out of order: {evs:?}")));
        }
        let dims = frames[0].dims();
        if let Some(bad) = frames.iter().position(|f| f.dims() != dims) {
            return Err(Error::StackShape(format!(
                "frame {bad} is {:?}, expected {dims:?}",
                frames[bad].dims()
            )));
        }
        Ok(Self { frames, evs })
    }

    pub fn frames(&self) -> &[YuvImage] {
        &self.frames
    }

    pub fn evs(&self) -> &[f64] {
        &self.evs
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    /// Luma planes as `[0,1]` reals.
    pub fn luma_unit(&self) -> Vec<PlaneR> {
        self.frames.iter().map(|f| f.y.to_unit()).collect()
    }

    pub fn into_parts(self) -> (Vec<YuvImage>, Vec<f64>) {
        (self.frames, self.evs)
    }
}
