// Writes a few synthetic bracketed sequences with manifests.
//
// cargo run --example synth_dataset -- /tmp/meflut-data

use std::path::{Path, PathBuf};

use meflut::imgio::{load_sequence_dir, save_sequence_dir};
use meflut::synth::{synthetic_dataset, DEFAULT_EVS};

pub fn run(out: &Path) -> meflut::Result<()> {
    for (i, stack) in synthetic_dataset(4, 160, 120, &DEFAULT_EVS, 0)?.iter().enumerate() {
        let dir = out.join(format!("seq_{i:03}"));
        save_sequence_dir(stack, &dir)?;
        let back = load_sequence_dir(&dir)?;
        let means: Vec<f64> = back.luma_unit().iter().map(|p| p.mean()).collect();
        println!("{}: evs {:?}, mean luma {:.3?}", dir.display(), back.evs(), means);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("meflut-data"));
    run(&out)
}
