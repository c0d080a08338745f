use crate::network::{GradientSet, NetworkParams};

pub const ADAM_EPS: f64 = 1e-8;

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: GradientSet,
    pub v: GradientSet,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &NetworkParams) -> Self {
        Self { m: GradientSet::zeros_like(params), v: GradientSet::zeros_like(params), step: 0 }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(params: &mut NetworkParams, grads: &GradientSet, state: &mut AdamState, lr: f64, betas: (f64, f64)) {
    let (b1, b2) = betas;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let g_tensors = grads.0.tensors();
    let m_tensors = state.m.0.tensors_mut();
    let v_tensors = state.v.0.tensors_mut();
    for (((p, g), m), v) in params.tensors_mut().into_iter().zip(g_tensors).zip(m_tensors).zip(v_tensors) {
        for i in 0..p.len() {
            let gi = g.data[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            p[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
        }
    }
}
