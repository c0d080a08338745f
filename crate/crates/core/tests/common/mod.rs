//! Scalar brute-force oracles and random instance builders shared by the
//! integration tests. Everything here is written straight from the
//! definitions, one pixel at a time, without sharing code with the library.

#![allow(dead_code)]

use meflut::imgio::{ExposureStack, LutMatrix, Plane8, PlaneR, YuvImage};
use meflut::network::{Conv2d, Linear, NetworkHyper, NetworkParams, Tensor4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(w: usize, h: usize, rng: &mut ChaCha8Rng) -> PlaneR {
    PlaneR::new(w, h, (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
}

pub fn random_plane8(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Plane8 {
    Plane8::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

pub fn random_frame(w: usize, h: usize, rng: &mut ChaCha8Rng) -> YuvImage {
    let rgb: Vec<u8> = (0..w * h * 3).map(|_| rng.gen()).collect();
    YuvImage::from_rgb8(w, h, &rgb).unwrap()
}

pub fn random_stack(k: usize, w: usize, h: usize, rng: &mut ChaCha8Rng) -> ExposureStack {
    let frames = (0..k).map(|_| random_frame(w, h, rng)).collect();
    ExposureStack::new(frames, (0..k).map(|i| i as f64 - (k / 2) as f64).collect()).unwrap()
}

/// Strictly positive random table.
pub fn random_lut(k: usize, rng: &mut ChaCha8Rng) -> LutMatrix {
    LutMatrix::from_fn(k, |_, _| rng.gen_range(0.01f32..1.0)).unwrap()
}

/// Seeded init with every bias redrawn, so no ReLU input sits on the kink
/// merely because a bias is zero.
pub fn random_params(k: usize, c: usize, seed: u64) -> NetworkParams {
    let mut p = NetworkParams::init(NetworkHyper::new(k, c), seed).unwrap();
    let mut r = rng(seed ^ 0xb1a5);
    for (i, t) in p.tensors_mut().into_iter().enumerate() {
        if i % 2 == 1 {
            t.iter_mut().for_each(|v| *v = r.gen_range(-0.1..0.1));
        }
    }
    p
}

pub fn random_tensor(k: usize, c: usize, h: usize, w: usize, seed: u64) -> Tensor4 {
    let mut r = rng(seed);
    Tensor4::new(k, c, h, w, (0..k * c * h * w).map(|_| r.gen_range(0.0..1.0)).collect()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sig(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn linear(l: &Linear, x: &[f64]) -> Vec<f64> {
    (0..l.out_features)
        .map(|o| l.bias[o] + (0..l.in_features).map(|j| l.weight[o * l.in_features + j] * x[j]).sum::<f64>())
        .collect()
}

/// Linear, ReLU, linear, sigmoid.
fn gate(l1: &Linear, l2: &Linear, x: &[f64]) -> Vec<f64> {
    let hidden: Vec<f64> = linear(l1, x).into_iter().map(|v| v.max(0.0)).collect();
    linear(l2, &hidden).into_iter().map(sig).collect()
}

/// Channel gate per frame, then frame gate per channel on the channel-gated features.
pub fn cfca_oracle(y: &Tensor4, p: &NetworkParams) -> Vec<f64> {
    let (kn, cn, h, w) = (y.frames, y.channels, y.height, y.width);
    let mut yc = vec![0.0; y.data.len()];
    for k in 0..kn {
        let pooled: Vec<f64> = (0..cn)
            .map(|c| {
                let mut s = 0.0;
                for yy in 0..h {
                    for xx in 0..w {
                        s += y.at(k, c, yy, xx);
                    }
                }
                s / (h * w) as f64
            })
            .collect();
        let g = gate(&p.channel_fc1, &p.channel_fc2, &pooled);
        for c in 0..cn {
            for yy in 0..h {
                for xx in 0..w {
                    yc[((k * cn + c) * h + yy) * w + xx] = y.at(k, c, yy, xx) * g[c];
                }
            }
        }
    }
    let mut out = yc.clone();
    for c in 0..cn {
        let pooled: Vec<f64> = (0..kn)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..h * w {
                    s += yc[(k * cn + c) * h * w + i];
                }
                s / (h * w) as f64
            })
            .collect();
        let g = gate(&p.frame_fc1, &p.frame_fc2, &pooled);
        for k in 0..kn {
            for i in 0..h * w {
                out[(k * cn + c) * h * w + i] *= g[k];
            }
        }
    }
    out
}

/// One output sample of a zero-padded "same" convolution.
fn conv_at(x: &[f64], cin: usize, h: usize, w: usize, conv: &Conv2d, co: usize, dil: usize, y: usize, xx: usize) -> f64 {
    let pad = (dil * (conv.kernel - 1) / 2) as isize;
    let mut s = conv.bias[co];
    for ci in 0..cin {
        for ky in 0..conv.kernel {
            for kx in 0..conv.kernel {
                let sy = y as isize + (ky * dil) as isize - pad;
                let sx = xx as isize + (kx * dil) as isize - pad;
                if sy >= 0 && sx >= 0 && (sy as usize) < h && (sx as usize) < w {
                    s += conv.weight[((co * conv.in_channels + ci) * conv.kernel + ky) * conv.kernel + kx]
                        * x[ci * h * w + sy as usize * w + sx as usize];
                }
            }
        }
    }
    s
}

/// Dilated branches gated by spatial attention, concatenated, then the head conv.
pub fn disa_oracle(x: &[f64], cn: usize, h: usize, w: usize, p: &NetworkParams) -> Vec<f64> {
    let mut concat = Vec::new();
    for b in &p.branches {
        let mut d = vec![0.0; cn * h * w];
        for c in 0..cn {
            for y in 0..h {
                for xx in 0..w {
                    d[c * h * w + y * w + xx] = conv_at(x, cn, h, w, &b.conv, c, b.rate, y, xx).max(0.0);
                }
            }
        }
        let mut pooled = vec![0.0; 2 * h * w];
        for i in 0..h * w {
            let vals: Vec<f64> = (0..cn).map(|c| d[c * h * w + i]).collect();
            pooled[i] = vals.iter().sum::<f64>() / cn as f64;
            pooled[h * w + i] = vals.iter().cloned().fold(f64::MIN, f64::max);
        }
        for c in 0..cn {
            for y in 0..h {
                for xx in 0..w {
                    let a = sig(conv_at(&pooled, 2, h, w, &b.attention, 0, 1, y, xx));
                    concat.push(d[c * h * w + y * w + xx] * a);
                }
            }
        }
    }
    let cin = cn * p.branches.len();
    (0..h * w).map(|i| conv_at(&concat, cin, h, w, &p.head, 0, 1, i / w, i % w)).collect()
}

fn patch(p: &PlaneR, px: usize, py: usize, win: usize) -> Vec<f64> {
    (0..win * win).map(|i| p.get(px + i % win, py + i / win)).collect()
}

fn centered(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Mean over valid patches of `(2<x^, y~> + C) / (|x^|^2 + |y~|^2 + C)`, where
/// `x^ = max_k c_k * s / |s|` and `s` is the contrast-weighted structure average.
pub fn mef_ssim_oracle(stack: &[PlaneR], fused: &PlaneR, win: usize, c: f64) -> f64 {
    let (w, h) = fused.dims();
    let c2 = c * (win * win) as f64;
    let mut scores = Vec::new();
    for py in 0..=h - win {
        for px in 0..=w - win {
            let xs: Vec<Vec<f64>> = stack.iter().map(|p| centered(&patch(p, px, py, win))).collect();
            let cs: Vec<f64> = xs.iter().map(|x| norm(x)).collect();
            let c_hat = cs.iter().cloned().fold(0.0, f64::max);
            let mut s = vec![0.0; win * win];
            let mut wsum = 0.0;
            for (x, &ck) in xs.iter().zip(&cs) {
                if ck < 1e-10 {
                    continue;
                }
                for i in 0..s.len() {
                    s[i] += ck * (x[i] / ck);
                }
                wsum += ck;
            }
            if wsum == 0.0 || norm(&s) / wsum < 1e-10 {
                scores.push(1.0);
                continue;
            }
            let sn = norm(&s);
            let xh: Vec<f64> = s.iter().map(|v| c_hat * v / sn).collect();
            let yt = centered(&patch(fused, px, py, win));
            let dot: f64 = xh.iter().zip(&yt).map(|(a, b)| a * b).sum();
            scores.push((2.0 * dot + c2) / (norm(&xh).powi(2) + norm(&yt).powi(2) + c2));
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// Uniform-window SSIM with population statistics, averaged over valid patches.
pub fn ssim_oracle(a: &PlaneR, b: &PlaneR, win: usize) -> f64 {
    let (w, h) = a.dims();
    let n = (win * win) as f64;
    let (c1, c2) = (1e-4, 9e-4);
    let mut scores = Vec::new();
    for y in 0..=h - win {
        for x in 0..=w - win {
            let pa = patch(a, x, y, win);
            let pb = patch(b, x, y, win);
            let ma = pa.iter().sum::<f64>() / n;
            let mb = pb.iter().sum::<f64>() / n;
            let va = pa.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / n;
            let vb = pb.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / n;
            let cov = pa.iter().zip(&pb).map(|(p, q)| (p - ma) * (q - mb)).sum::<f64>() / n;
            scores.push((2.0 * ma * mb + c1) * (2.0 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)));
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// Mean of `f` over the window of radius `r` around `(x, y)`, clipped to the image.
fn window_mean(w: usize, h: usize, x: usize, y: usize, r: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    let (x0, x1) = (x.saturating_sub(r), (x + r).min(w - 1));
    let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
    let mut s = 0.0;
    for yy in y0..=y1 {
        for xx in x0..=x1 {
            s += f(xx, yy);
        }
    }
    s / ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64
}

/// Guided filter: per-window linear fit `p ~ a I + b`, coefficients averaged
/// over every window covering the pixel, applied to the guide.
pub fn guided_filter_oracle(p: &PlaneR, guide: &PlaneR, r: usize, eps: f64) -> Vec<f64> {
    let (w, h) = p.dims();
    let mut a = vec![0.0; w * h];
    let mut b = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mi = window_mean(w, h, x, y, r, |u, v| guide.get(u, v));
            let mp = window_mean(w, h, x, y, r, |u, v| p.get(u, v));
            let var = window_mean(w, h, x, y, r, |u, v| (guide.get(u, v) - mi).powi(2));
            let cov = window_mean(w, h, x, y, r, |u, v| (guide.get(u, v) - mi) * (p.get(u, v) - mp));
            a[y * w + x] = cov / (var + eps);
            b[y * w + x] = mp - a[y * w + x] * mi;
        }
    }
    (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let ma = window_mean(w, h, x, y, r, |u, v| a[v * w + u]);
            let mb = window_mean(w, h, x, y, r, |u, v| b[v * w + u]);
            ma * guide.get(x, y) + mb
        })
        .collect()
}

type Grid = Vec<Vec<f64>>;

const K5: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

fn clampi(i: isize, n: usize) -> usize {
    i.max(0).min(n as isize - 1) as usize
}

pub fn to_grid(p: &PlaneR) -> Grid {
    p.data().chunks(p.width()).map(|r| r.to_vec()).collect()
}

/// 5x5 binomial blur with edge replication, keeping even samples.
fn reduce(p: &Grid) -> Grid {
    let (h, w) = (p.len(), p[0].len());
    let (oh, ow) = ((h + 1) / 2, (w + 1) / 2);
    let mut out = vec![vec![0.0; ow]; oh];
    for oy in 0..oh {
        for ox in 0..ow {
            for i in 0..5 {
                for j in 0..5 {
                    let y = clampi(2 * oy as isize + i as isize - 2, h);
                    let x = clampi(2 * ox as isize + j as isize - 2, w);
                    out[oy][ox] += K5[i] * K5[j] / 256.0 * p[y][x];
                }
            }
        }
    }
    out
}

/// Weight of coarse sample `m` (of `n`) at fine position `i`.
fn expand_weight(i: usize, m: usize, n: usize) -> f64 {
    let c = (i / 2) as isize;
    let taps: Vec<(usize, f64)> = if i % 2 == 0 {
        vec![(clampi(c - 1, n), 0.125), (clampi(c, n), 0.75), (clampi(c + 1, n), 0.125)]
    } else {
        vec![(clampi(c, n), 0.5), (clampi(c + 1, n), 0.5)]
    };
    taps.iter().filter(|t| t.0 == m).map(|t| t.1).sum()
}

fn expand(p: &Grid, h: usize, w: usize) -> Grid {
    let (ch, cw) = (p.len(), p[0].len());
    let mut out = vec![vec![0.0; w]; h];
    for y in 0..h {
        for x in 0..w {
            for m in 0..ch {
                for n in 0..cw {
                    out[y][x] += expand_weight(y, m, ch) * expand_weight(x, n, cw) * p[m][n];
                }
            }
        }
    }
    out
}

fn zip_with(a: &Grid, b: &Grid, f: impl Fn(f64, f64) -> f64) -> Grid {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| f(*x, *y)).collect()).collect()
}

/// Laplacian bands of the frames weighted by Gaussian bands of the weights,
/// summed per level, collapsed and clamped to `[0,1]`.
pub fn pyramid_blend_oracle(ys: &[PlaneR], ws: &[PlaneR], levels: usize) -> Vec<f64> {
    let mut blended: Vec<Grid> = Vec::new();
    for (y, w) in ys.iter().zip(ws) {
        let mut g = vec![to_grid(y)];
        let mut gw = vec![to_grid(w)];
        for l in 1..levels {
            g.push(reduce(&g[l - 1]));
            gw.push(reduce(&gw[l - 1]));
        }
        for l in 0..levels {
            let band = if l + 1 < levels {
                zip_with(&g[l], &expand(&g[l + 1], g[l].len(), g[l][0].len()), |a, b| a - b)
            } else {
                g[l].clone()
            };
            let contrib = zip_with(&band, &gw[l], |a, b| a * b);
            if blended.len() <= l {
                blended.push(contrib);
            } else {
                blended[l] = zip_with(&blended[l], &contrib, |a, b| a + b);
            }
        }
    }
    let mut recon = blended[levels - 1].clone();
    for l in (0..levels - 1).rev() {
        recon = zip_with(&expand(&recon, blended[l].len(), blended[l][0].len()), &blended[l], |a, b| a + b);
    }
    recon.into_iter().flatten().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// Random per-pixel convex weights.
pub fn random_weight_planes(k: usize, w: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<PlaneR> {
    let raw: Vec<PlaneR> = (0..k).map(|_| random_plane(w, h, rng)).collect();
    let mut planes = raw.clone();
    for i in 0..w * h {
        let s: f64 = raw.iter().map(|p| p.data()[i]).sum();
        for p in planes.iter_mut() {
            p.data_mut()[i] /= s;
        }
    }
    planes
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &t in &idx[i..=j] {
                r[t] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}
