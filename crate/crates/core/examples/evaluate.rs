// Scores several fusion methods on synthetic stacks and prints a TSV report.
// The rendering at EV 0 plays the reference for PSNR and SSIM.
//
// cargo run --example evaluate

use meflut::baseline::{fuse_mertens, MertensConfig};
use meflut::cli::demo_lut;
use meflut::lut_engine::{fuse, FusionConfig};
use meflut::metrics::{evaluate, EvalReport};
use meflut::synth::{render_exposure, synthetic_radiance, DEFAULT_EVS};
use meflut::imgio::ExposureStack;

pub fn run() -> meflut::Result<()> {
    let lut = demo_lut(DEFAULT_EVS.len())?;
    let mut lut_report = EvalReport::default();
    let mut mertens_report = EvalReport::default();
    for seed in 0..4 {
        let radiance = synthetic_radiance(160, 120, seed)?;
        let frames = DEFAULT_EVS.iter().map(|&ev| render_exposure(&radiance, ev)).collect::<meflut::Result<Vec<_>>>()?;
        let stack = ExposureStack::new(frames, DEFAULT_EVS.to_vec())?;
        let reference = render_exposure(&radiance, 0.0)?;
        let name = format!("scene_{seed}");
        lut_report.push(evaluate(&name, &fuse(&stack, &lut, &FusionConfig::default())?, Some(&reference), &stack)?);
        mertens_report.push(evaluate(&name, &fuse_mertens(&stack, &MertensConfig::default())?, Some(&reference), &stack)?);
    }
    println!("# lut\n{}", lut_report.to_tsv());
    println!("# mertens\n{}", mertens_report.to_tsv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    run()
}
