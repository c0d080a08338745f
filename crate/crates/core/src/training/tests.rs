use super::*;
use crate::imgio::{Plane8, PlaneR};
use crate::lut_engine::query_weights;
use crate::network::{NetworkHyper, NetworkParams};
use crate::synth::{synthetic_dataset, DEFAULT_EVS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_plane(w: usize, h: usize, rng: &mut ChaCha8Rng) -> PlaneR {
    PlaneR::new(w, h, (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
}

/// Patch-by-patch evaluation straight from the definition.
fn mef_ssim_oracle(stack: &[PlaneR], fused: &PlaneR, win: usize, c: f64) -> f64 {
    let (w, h) = fused.dims();
    let n = (win * win) as f64;
    let mut scores = Vec::new();
    for py in 0..=h - win {
        for px in 0..=w - win {
            let patch = |p: &PlaneR| -> Vec<f64> {
                let vals: Vec<f64> =
                    (0..win * win).map(|i| p.get(px + i % win, py + i / win)).collect();
                let m = vals.iter().sum::<f64>() / n;
                vals.iter().map(|v| v - m).collect()
            };
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let xs: Vec<Vec<f64>> = stack.iter().map(patch).collect();
            let cs: Vec<f64> = xs.iter().map(|x| norm(x)).collect();
            let c_hat = cs.iter().cloned().fold(0.0, f64::max);
            let mut num = vec![0.0; win * win];
            let mut den = 0.0;
            for (x, &ck) in xs.iter().zip(&cs) {
                if ck < 1e-10 {
                    continue;
                }
                for i in 0..num.len() {
                    num[i] += ck * x[i] / ck;
                }
                den += ck;
            }
            if den == 0.0 || norm(&num) / den < 1e-10 {
                scores.push(1.0);
                continue;
            }
            let s_norm = norm(&num);
            let xh: Vec<f64> = num.iter().map(|v| c_hat * v / s_norm).collect();
            let yt = patch(fused);
            let dot: f64 = xh.iter().zip(&yt).map(|(a, b)| a * b).sum();
            let c2 = c * n;
            scores.push((2.0 * dot + c2) / (norm(&xh).powi(2) + norm(&yt).powi(2) + c2));
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

#[test]
fn mef_ssim_matches_oracle_on_9x9() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let stack: Vec<PlaneR> = (0..3).map(|_| random_plane(9, 9, &mut rng)).collect();
    let fused = random_plane(9, 9, &mut rng);
    for win in [3, 5, 7, 9] {
        let got = mef_ssim_score(&stack, &fused, win, DEFAULT_STABILITY_C).unwrap();
        let want = mef_ssim_oracle(&stack, &fused, win, DEFAULT_STABILITY_C);
        assert!((got - want).abs() < 1e-8, "window {win}: {got} vs {want}");
    }
}

#[test]
fn mef_ssim_single_frame_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let y = random_plane(12, 10, &mut rng);
    let s = mef_ssim_score(std::slice::from_ref(&y), &y, 7, DEFAULT_STABILITY_C).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn mef_ssim_constant_fused_scores_low() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let stack: Vec<PlaneR> = (0..3).map(|_| random_plane(16, 16, &mut rng)).collect();
    let flat = PlaneR::filled(16, 16, 0.5).unwrap();
    let s = mef_ssim_score(&stack, &flat, 7, DEFAULT_STABILITY_C).unwrap();
    assert!(s < 0.5, "{s}");
}

#[test]
fn mef_ssim_is_frame_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let stack: Vec<PlaneR> = (0..3).map(|_| random_plane(11, 11, &mut rng)).collect();
    let fused = random_plane(11, 11, &mut rng);
    let a = mef_ssim_score(&stack, &fused, 5, DEFAULT_STABILITY_C).unwrap();
    let rev: Vec<PlaneR> = stack.iter().rev().cloned().collect();
    let b = mef_ssim_score(&rev, &fused, 5, DEFAULT_STABILITY_C).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn mef_ssim_desired_patch_scores_one() {
    // window = image size: one patch, fused set to the desired patch
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let stack: Vec<PlaneR> = (0..3).map(|_| random_plane(7, 7, &mut rng)).collect();
    let reference = MefSsimReference::new(&stack, 7, DEFAULT_STABILITY_C).unwrap();
    let xh = reference.desired_patch(0, 0).unwrap().to_vec();
    let fused = PlaneR::new(7, 7, xh.iter().map(|v| v + 0.5).collect()).unwrap();
    assert!((reference.score(&fused).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn mef_ssim_errors() {
    let a = PlaneR::filled(8, 8, 0.1).unwrap();
    let b = PlaneR::filled(9, 8, 0.1).unwrap();
    assert!(matches!(mef_ssim_score(&[a.clone()], &b, 7, 1e-4), Err(crate::Error::Shape(_))));
    assert!(matches!(mef_ssim_score(&[a.clone(), b.clone()], &a, 7, 1e-4), Err(crate::Error::Shape(_))));
    assert!(matches!(mef_ssim_score(&[a.clone()], &a, 4, 1e-4), Err(crate::Error::Config(_))));
}

#[test]
fn flat_stack_is_degenerate_everywhere() {
    let stack = vec![PlaneR::filled(9, 9, 0.2).unwrap(), PlaneR::filled(9, 9, 0.7).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = mef_ssim_score(&stack, &random_plane(9, 9, &mut rng), 3, DEFAULT_STABILITY_C).unwrap();
    assert!((s - 1.0).abs() < 1e-15);
}

#[test]
fn score_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let stack: Vec<PlaneR> = (0..3).map(|_| random_plane(10, 9, &mut rng)).collect();
    let fused = random_plane(10, 9, &mut rng);
    let r = MefSsimReference::new(&stack, 5, DEFAULT_STABILITY_C).unwrap();
    let (_, g) = r.score_and_grad(&fused).unwrap();
    let h = 1e-6;
    for i in 0..fused.data().len() {
        let mut p = fused.clone();
        p.data_mut()[i] += h;
        let mut m = fused.clone();
        m.data_mut()[i] -= h;
        let fd = (r.score(&p).unwrap() - r.score(&m).unwrap()) / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-7, "pixel {i}: {fd} vs {}", g[i]);
    }
}

fn tiny_sample(seed: u64) -> Vec<PlaneR> {
    let stack = &synthetic_dataset(1, 16, 16, &DEFAULT_EVS, seed).unwrap()[0];
    stack.luma_unit()
}

#[test]
fn single_frame_loss_is_zero() {
    let p = NetworkParams::init(NetworkHyper::new(1, 4), 1).unwrap();
    let y = tiny_sample(8);
    let l = loss(&y[1..2], &p, &TrainConfig::default()).unwrap();
    assert!(l.abs() < 1e-12);
}

#[test]
fn network_gradients_match_finite_differences() {
    // zero biases put ReLU inputs exactly on the kink wherever features
    // vanish, so draw them at random like the weights
    let mut p = NetworkParams::init(NetworkHyper::new(3, 4), 11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (i, t) in p.tensors_mut().into_iter().enumerate() {
        if i % 2 == 1 {
            t.iter_mut().for_each(|v| *v = rng.gen_range(-0.1..0.1));
        }
    }
    let y = tiny_sample(12);
    let cfg = TrainConfig::default();
    let (l0, g) = gradients(&y, &p, &cfg).unwrap();
    assert!((0.0..1.0).contains(&l0));
    let h = 1e-5;
    let mut bad = 0;
    let mut checked = 0;
    for i in (0..p.num_scalars()).step_by(5) {
        let mut a = p.clone();
        *a.scalar_mut(i) += h;
        let mut b = p.clone();
        *b.scalar_mut(i) -= h;
        let fd = (loss(&y, &a, &cfg).unwrap() - loss(&y, &b, &cfg).unwrap()) / (2.0 * h);
        let an = g.scalar(i);
        let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-9);
        checked += 1;
        if rel > 1e-3 && (an - fd).abs() > 1e-9 {
            bad += 1;
        }
    }
    assert!(bad * 100 <= checked, "{bad} of {checked} disagree");
}

#[test]
fn head_bias_gradient_vanishes() {
    let p = NetworkParams::init(NetworkHyper::new(3, 4), 13).unwrap();
    let (_, g) = gradients(&tiny_sample(14), &p, &TrainConfig::default()).unwrap();
    assert!(g.params().head.bias[0].abs() < 1e-8);
}

#[test]
fn stability_constant_matters() {
    let p = NetworkParams::init(NetworkHyper::new(3, 4), 15).unwrap();
    let y = tiny_sample(16);
    let cfg = TrainConfig::default();
    let (_, a) = gradients(&y, &p, &cfg).unwrap();
    let cfg2 = TrainConfig { stability_c: 2.0 * cfg.stability_c, ..cfg };
    let (_, b) = gradients(&y, &p, &cfg2).unwrap();
    let diff = (0..p.num_scalars()).map(|i| (a.scalar(i) - b.scalar(i)).abs()).fold(0.0, f64::max);
    assert!(diff > 0.0);
}

fn small_cfg() -> TrainConfig {
    TrainConfig { channels: 4, epochs: 2, seed: 5, learning_rate: 1e-3, ..TrainConfig::default() }
}

#[test]
fn training_is_deterministic_and_logs_each_epoch() {
    let data = synthetic_dataset(3, 24, 24, &DEFAULT_EVS, 20).unwrap();
    let mut log = Vec::new();
    let a = train_logged(&data, &small_cfg(), |e, l| log.push((e, l))).unwrap();
    let b = train(&data, &small_cfg()).unwrap();
    assert_eq!(a, b);
    assert_eq!(log.len(), 2);
    assert_eq!(log[0].0, 1);
    assert!(log.iter().all(|&(_, l)| (0.0..1.0).contains(&l)));
}

#[test]
fn zero_epochs_returns_init() {
    let data = synthetic_dataset(2, 16, 16, &DEFAULT_EVS, 30).unwrap();
    let cfg = TrainConfig { epochs: 0, ..small_cfg() };
    let p = train(&data, &cfg).unwrap();
    assert_eq!(p, NetworkParams::init(NetworkHyper::new(3, 4), cfg.seed).unwrap());
}

#[test]
fn mixed_frame_counts_rejected() {
    let mut data = synthetic_dataset(1, 16, 16, &DEFAULT_EVS, 40).unwrap();
    data.extend(synthetic_dataset(1, 16, 16, &[-1.0, 1.0], 41).unwrap());
    assert!(matches!(train(&data, &small_cfg()), Err(crate::Error::StackShape(_))));
}

#[test]
fn loss_drops_after_fifty_steps() {
    let data = synthetic_dataset(5, 32, 32, &DEFAULT_EVS, 50).unwrap();
    let cfg = TrainConfig { epochs: 10, ..small_cfg() };
    let samples = prepare_dataset(&data, &cfg).unwrap();
    let init = NetworkParams::init(NetworkHyper::new(3, 4), cfg.seed).unwrap();
    let before = mean_loss(&samples, &init).unwrap();
    let trained = train_samples(init, &samples, &cfg, |_, _| {}).unwrap();
    let after = mean_loss(&samples, &trained).unwrap();
    assert!(after <= 0.95 * before, "{before} -> {after}");
}

#[test]
fn extracted_lut_columns_sum_to_one_and_match_query() {
    let p = NetworkParams::init(NetworkHyper::new(3, 4), 60).unwrap();
    let lut = extract_luts_with(&p, 8, 1).unwrap();
    for v in 0..256 {
        let s: f32 = (0..3).map(|k| lut.get(k, v as u8)).sum();
        assert!((s - 1.0).abs() < 1e-4);
    }
    let planes: Vec<Plane8> = (0..3).map(|_| Plane8::filled(5, 4, 77).unwrap()).collect();
    let w = query_weights(&lut, &planes).unwrap();
    for (k, plane) in w.planes().iter().enumerate() {
        assert!(plane.data().iter().all(|&x| x == lut.get(k, 77) as f64));
    }
    assert_eq!(lut, extract_luts_with(&p, 8, 2).unwrap());
}
