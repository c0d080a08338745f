// Classical exposure fusion next to the LUT path on the same stack.
//
// cargo run --example mertens_baseline -- /tmp/meflut-mertens

use std::path::{Path, PathBuf};

use meflut::baseline::{default_levels, fuse_mertens, MertensConfig};
use meflut::cli::demo_lut;
use meflut::imgio::save_image;
use meflut::lut_engine::{fuse, FusionConfig};
use meflut::metrics::evaluate;
use meflut::synth::{synthetic_stack, DEFAULT_EVS};

pub fn run(out: &Path) -> meflut::Result<()> {
    std::fs::create_dir_all(out)?;
    let stack = synthetic_stack(256, 192, &DEFAULT_EVS, 21)?;
    println!("pyramid levels: {}", default_levels(256, 192));
    let mertens = fuse_mertens(&stack, &MertensConfig::default())?;
    let lut = fuse(&stack, &demo_lut(stack.len())?, &FusionConfig::default())?;
    for (name, img) in [("mertens", &mertens), ("lut", &lut)] {
        let row = evaluate(name, img, None, &stack)?;
        println!("{name:<8} MEF-SSIM {:.4}", row.mef_ssim);
        save_image(img, out.join(format!("{name}.png")))?;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("meflut-mertens"));
    run(&out)
}
