//! Reverse-mode gradients for the forward pass in `forward.rs`.

use super::conv::conv_backward;
use super::forward::ForwardTrace;
use super::params::{GradientSet, Linear, NetworkParams};
use crate::error::{Error, Result};

/// Backprop through `out = W in + b`. Accumulates into `grad` and returns
/// the input gradient.
fn linear_backward(layer: &Linear, input: &[f64], d_out: &[f64], grad: &mut Linear) -> Vec<f64> {
    let n_in = layer.in_features;
    let mut d_in = vec![0.0; n_in];
    for (o, &g) in d_out.iter().enumerate() {
        grad.bias[o] += g;
        let row = &layer.weight[o * n_in..(o + 1) * n_in];
        let grow = &mut grad.weight[o * n_in..(o + 1) * n_in];
        for j in 0..n_in {
            grow[j] += g * input[j];
            d_in[j] += g * row[j];
        }
    }
    d_in
}

/// Gradients of a scalar loss given `d_weights`, its derivative with respect
/// to the softmax output `[K * HW]` of `trace`.
pub fn network_backward(trace: &ForwardTrace, params: &NetworkParams, d_weights: &[f64]) -> Result<GradientSet> {
    let k_n = trace.k_frames;
    let c_n = params.channels();
    let (h, w) = (trace.height, trace.width);
    let hw = h * w;
    if d_weights.len() != k_n * hw {
        return Err(Error::Shape(format!("weight gradient has {} values, expected {}", d_weights.len(), k_n * hw)));
    }
    let mut grad = GradientSet::zeros_like(params);
    let g = &mut grad.0;

    // softmax
    let mut d_raw = vec![0.0; k_n * hw];
    for i in 0..hw {
        let dot: f64 = (0..k_n).map(|k| trace.weights[k * hw + i] * d_weights[k * hw + i]).sum();
        for k in 0..k_n {
            let wk = trace.weights[k * hw + i];
            d_raw[k * hw + i] = wk * (d_weights[k * hw + i] - dot);
        }
    }

    // per-frame DISA and head, weights shared across frames
    let mut d_gated = vec![0.0; k_n * c_n * hw];
    for k in 0..k_n {
        let dt = &trace.disa[k];
        let x_k = &trace.gated[k * c_n * hw..(k + 1) * c_n * hw];
        let dx_k = &mut d_gated[k * c_n * hw..(k + 1) * c_n * hw];
        let mut d_concat = vec![0.0; dt.concat.len()];
        conv_backward(&dt.concat, h, w, &params.head, 1, &d_raw[k * hw..(k + 1) * hw], &mut g.head, Some(&mut d_concat));

        for (b, (branch, bt)) in params.branches.iter().zip(&dt.branches).enumerate() {
            let dc = &d_concat[b * c_n * hw..(b + 1) * c_n * hw];
            let mut d_d = vec![0.0; c_n * hw];
            let mut d_att = vec![0.0; hw];
            for c in 0..c_n {
                for i in 0..hw {
                    let idx = c * hw + i;
                    d_att[i] += dc[idx] * bt.pre[idx].max(0.0);
                    d_d[idx] = dc[idx] * bt.gate[i];
                }
            }
            for (da, &gt) in d_att.iter_mut().zip(&bt.gate) {
                *da *= gt * (1.0 - gt);
            }
            let mut d_pooled = vec![0.0; 2 * hw];
            let gb = &mut g.branches[b];
            conv_backward(&bt.pooled, h, w, &branch.attention, 1, &d_att, &mut gb.attention, Some(&mut d_pooled));
            let inv = 1.0 / c_n as f64;
            for i in 0..hw {
                let dm = d_pooled[i] * inv;
                for c in 0..c_n {
                    d_d[c * hw + i] += dm;
                }
                d_d[bt.argmax[i] as usize * hw + i] += d_pooled[hw + i];
            }
            for (d, &p) in d_d.iter_mut().zip(&bt.pre) {
                if p <= 0.0 {
                    *d = 0.0;
                }
            }
            conv_backward(x_k, h, w, &branch.conv, branch.rate, &d_d, &mut gb.conv, Some(&mut *dx_k));
        }
    }

    // CFCA
    let ct = &trace.cfca;
    let hidden_c = params.channel_fc1.out_features;
    let mut d_gate_c = vec![0.0; k_n * c_n];
    let mut d_gate_f = vec![0.0; c_n * k_n];
    let mut d_feat = vec![0.0; k_n * c_n * hw];
    for k in 0..k_n {
        for c in 0..c_n {
            let off = (k * c_n + c) * hw;
            let gc = ct.gate_channel[k * c_n + c];
            let gf = ct.gate_frame[c * k_n + k];
            let gate = gc * gf;
            let mut d_gate = 0.0;
            for i in off..off + hw {
                d_gate += d_gated[i] * trace.features[i];
                d_feat[i] = d_gated[i] * gate;
            }
            d_gate_c[k * c_n + c] += d_gate * gf;
            d_gate_f[c * k_n + k] += d_gate * gc;
        }
    }

    let mut d_pooled_f = vec![0.0; k_n * c_n];
    let mut pf = vec![0.0; k_n];
    for c in 0..c_n {
        let gates = &ct.gate_frame[c * k_n..(c + 1) * k_n];
        let dz: Vec<f64> = (0..k_n).map(|k| d_gate_f[c * k_n + k] * gates[k] * (1.0 - gates[k])).collect();
        let hidden = &ct.hidden_frame[c * k_n..(c + 1) * k_n];
        let act: Vec<f64> = hidden.iter().map(|v| v.max(0.0)).collect();
        let mut d_act = linear_backward(&params.frame_fc2, &act, &dz, &mut g.frame_fc2);
        d_act.iter_mut().zip(hidden).for_each(|(d, h)| if *h <= 0.0 { *d = 0.0 });
        for k in 0..k_n {
            pf[k] = ct.pooled_frame[k * c_n + c];
        }
        let d_in = linear_backward(&params.frame_fc1, &pf, &d_act, &mut g.frame_fc1);
        for k in 0..k_n {
            d_pooled_f[k * c_n + c] = d_in[k];
        }
    }

    for k in 0..k_n {
        let pc = &ct.pooled_channel[k * c_n..(k + 1) * c_n];
        let gates = &ct.gate_channel[k * c_n..(k + 1) * c_n];
        let mut d_pc = vec![0.0; c_n];
        let mut dz = vec![0.0; c_n];
        for c in 0..c_n {
            let dpf = d_pooled_f[k * c_n + c];
            d_pc[c] += dpf * gates[c];
            let dg = d_gate_c[k * c_n + c] + dpf * pc[c];
            dz[c] = dg * gates[c] * (1.0 - gates[c]);
        }
        let hidden = &ct.hidden_channel[k * hidden_c..(k + 1) * hidden_c];
        let act: Vec<f64> = hidden.iter().map(|v| v.max(0.0)).collect();
        let mut d_act = linear_backward(&params.channel_fc2, &act, &dz, &mut g.channel_fc2);
        d_act.iter_mut().zip(hidden).for_each(|(d, h)| if *h <= 0.0 { *d = 0.0 });
        let d_in = linear_backward(&params.channel_fc1, pc, &d_act, &mut g.channel_fc1);
        for c in 0..c_n {
            let add = (d_pc[c] + d_in[c]) / hw as f64;
            let off = (k * c_n + c) * hw;
            d_feat[off..off + hw].iter_mut().for_each(|d| *d += add);
        }
    }

    // stem
    for (d, &p) in d_feat.iter_mut().zip(&trace.stem_pre) {
        if p <= 0.0 {
            *d = 0.0;
        }
    }
    for k in 0..k_n {
        conv_backward(
            &trace.input[k * hw..(k + 1) * hw],
            h,
            w,
            &params.stem,
            1,
            &d_feat[k * c_n * hw..(k + 1) * c_n * hw],
            &mut g.stem,
            None,
        );
    }
    Ok(grad)
}
