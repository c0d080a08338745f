// Renders LUT rows as a plot image, one gray level per exposure.
//
// cargo run --example lut_visualize -- [table.mefl] [out.png]

use std::path::{Path, PathBuf};

use meflut::cli::demo_lut;
use meflut::imgio::{read_lut, save_plane, LutMatrix, Plane8, LUT_SIZE};

/// 256 columns wide; row curves scaled to the largest entry.
pub fn plot(lut: &LutMatrix, height: usize) -> meflut::Result<Plane8> {
    let mut img = Plane8::filled(LUT_SIZE, height, 0)?;
    let peak = lut.table().iter().cloned().fold(f32::MIN_POSITIVE, f32::max);
    let k = lut.k_frames();
    for row in 0..k {
        let shade = (255 * (row + 1) / k) as u8;
        for v in 0..LUT_SIZE {
            let y = ((1.0 - lut.row(row)[v] / peak) * (height - 1) as f32).round() as usize;
            img.data_mut()[y * LUT_SIZE + v] = shade;
        }
    }
    Ok(img)
}

pub fn run(lut: Option<&Path>, out: &Path) -> meflut::Result<()> {
    let lut = match lut {
        Some(p) => read_lut(p)?,
        None => demo_lut(3)?,
    };
    for k in 0..lut.k_frames() {
        let row = lut.row(k);
        let argmax = (0..LUT_SIZE).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap_or(0);
        println!("row {k}: peak at v={argmax}, L(0)={:.3}, L(255)={:.3}", row[0], row[255]);
    }
    save_plane(&plot(&lut, 128)?, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    let mut args = std::env::args().skip(1);
    let lut = args.next().map(PathBuf::from);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("meflut-lut.png"));
    run(lut.as_deref(), &out)
}
