// Fuses one exposure stack with a LUT and writes the result plus weight maps.
//
// cargo run --example fuse_sequence -- /tmp/meflut-fuse

use std::path::{Path, PathBuf};

use meflut::cli::demo_lut;
use meflut::imgio::{save_image, save_plane};
use meflut::lut_engine::{fuse_detailed, FusionConfig};
use meflut::synth::{synthetic_stack, DEFAULT_EVS};

pub fn run(out: &Path) -> meflut::Result<()> {
    std::fs::create_dir_all(out)?;
    let stack = synthetic_stack(320, 240, &DEFAULT_EVS, 11)?;
    let lut = demo_lut(stack.len())?;
    let fused = fuse_detailed(&stack, &lut, &FusionConfig::default())?;
    for (k, frame) in stack.frames().iter().enumerate() {
        save_image(frame, out.join(format!("input_{k}.png")))?;
    }
    for (k, w) in fused.weights.to_debug_planes().iter().enumerate() {
        save_plane(w, out.join(format!("weight_{k}.png")))?;
    }
    save_image(&fused.image, out.join("fused.png"))?;
    println!(
        "low-res weights {:?}, full-res {:?}, max sum deviation {:.1e}",
        fused.low_weights.dims(),
        fused.weights.dims(),
        fused.weights.max_sum_deviation()
    );
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("meflut-fuse"));
    run(&out)
}
