// Trains a small weight network on synthetic stacks, collapses it into a
// LUT, and compares both on a held-out stack.
//
// cargo run --example train_and_extract -- 30

use meflut::lut_engine::{fuse, fuse_with, FusionConfig};
use meflut::metrics::evaluate;
use meflut::synth::{synthetic_dataset, synthetic_stack, DEFAULT_EVS};
use meflut::training::{extract_luts_with, train_logged, TrainConfig};

pub fn run(epochs: usize) -> meflut::Result<()> {
    let data = synthetic_dataset(4, 64, 64, &DEFAULT_EVS, 100)?;
    let cfg = TrainConfig { epochs, learning_rate: 1e-3, channels: 8, seed: 1, ..Default::default() };
    let params = train_logged(&data, &cfg, |epoch, loss| {
        if epoch == 1 || epoch % 10 == 0 || epoch == epochs {
            println!("epoch {epoch:>3}  loss {loss:.5}");
        }
    })?;
    let lut = extract_luts_with(&params, 64, 1)?;
    for v in [16u8, 64, 128, 192, 240] {
        let col: Vec<f32> = (0..lut.k_frames()).map(|k| lut.get(k, v)).collect();
        println!("L(:, {v:>3}) = {col:.3?}");
    }

    let held_out = synthetic_stack(192, 128, &DEFAULT_EVS, 999)?;
    let fcfg = FusionConfig::default();
    let net = evaluate("network", &fuse_with(&held_out, &params, &fcfg)?, None, &held_out)?;
    let via_lut = evaluate("lut", &fuse(&held_out, &lut, &fcfg)?, None, &held_out)?;
    println!("MEF-SSIM network {:.4}, LUT {:.4}", net.mef_ssim, via_lut.mef_ssim);
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(30);
    run(epochs)
}
