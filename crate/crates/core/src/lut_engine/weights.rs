use crate::error::{Error, Result};
use crate::imgio::{LutMatrix, Plane8, PlaneR};

/// `K` per-pixel weight planes of identical size.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMaps {
    planes: Vec<PlaneR>,
}

impl WeightMaps {
    pub fn new(planes: Vec<PlaneR>) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::StackShape("weight maps need at least one plane".into()))?;
        let dims = first.dims();
        if planes.iter().any(|p| p.dims() != dims) {
            return Err(Error::StackShape("weight planes differ in size".into()));
        }
        for (k, p) in planes.iter().enumerate() {
            if let Some(v) = p.data().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::WeightDomain(format!("weight {v} in plane {k}")));
            }
        }
        Ok(Self { planes })
    }

    pub(crate) fn from_raw(planes: Vec<PlaneR>) -> Self {
        Self { planes }
    }

    pub fn k_frames(&self) -> usize {
        self.planes.len()
    }

    pub fn planes(&self) -> &[PlaneR] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<PlaneR> {
        self.planes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    /// Largest deviation of a per-pixel sum from one.
    pub fn max_sum_deviation(&self) -> f64 {
        let n = self.planes[0].data().len();
        (0..n)
            .map(|i| (self.planes.iter().map(|p| p.data()[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Each plane scaled by 255 and clamped, for inspection.
    pub fn to_debug_planes(&self) -> Vec<Plane8> {
        self.planes.iter().map(|p| p.to_u8()).collect()
    }
}

/// Looks up every low-res pixel of frame `k` in LUT row `k`.
pub fn query_weights(lut: &LutMatrix, ylow: &[Plane8]) -> Result<WeightMaps> {
    if ylow.len() != lut.k_frames() {
        return Err(Error::StackShape(format!(
            "LUT has {} rows but {} frames were given",
            lut.k_frames(),
            ylow.len()
        )));
    }
    let dims = ylow[0].dims();
    if ylow.iter().any(|p| p.dims() != dims) {
        return Err(Error::StackShape("low-res planes differ in size".into()));
    }
    let planes = ylow
        .iter()
        .enumerate()
        .map(|(k, plane)| {
            let row = lut.row(k);
            let data = plane.data().iter().map(|&v| row[v as usize] as f64).collect();
            PlaneR::from_raw(dims.0, dims.1, data)
        })
        .collect();
    Ok(WeightMaps::from_raw(planes))
}

/// Quantizes `[0,1]` planes round-half-up and queries.
pub fn query_weights_unit(lut: &LutMatrix, ylow: &[PlaneR]) -> Result<WeightMaps> {
    query_weights(lut, &quantize_planes(ylow))
}

/// `(w_k + eps) / sum_j (w_j + eps)` per pixel.
pub fn normalize_weights(weights: &WeightMaps, norm_eps: f64) -> Result<WeightMaps> {
    if !(norm_eps > 0.0) {
        return Err(Error::Config("norm_eps must be > 0".into()));
    }
    for (k, p) in weights.planes.iter().enumerate() {
        if let Some(v) = p.data().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::WeightDomain(format!("negative or NaN weight {v} in plane {k}")));
        }
    }
    let (w, h) = weights.dims();
    let n = w * h;
    let mut sums = vec![0.0; n];
    for p in &weights.planes {
        for (s, &v) in sums.iter_mut().zip(p.data()) {
            *s += v + norm_eps;
        }
    }
    let planes = weights
        .planes
        .iter()
        .map(|p| {
            let data = p.data().iter().zip(&sums).map(|(&v, &s)| (v + norm_eps) / s).collect();
            PlaneR::from_raw(w, h, data)
        })
        .collect();
    Ok(WeightMaps::from_raw(planes))
}

/// Rounds `[0,1]` reals to the 8-bit query domain.
pub fn quantize_planes(planes: &[PlaneR]) -> Vec<Plane8> {
    planes.iter().map(PlaneR::to_u8).collect()
}
