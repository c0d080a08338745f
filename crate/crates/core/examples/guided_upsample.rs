// Upsamples a hard low-res weight map with guided filtering and with plain
// bilinear resizing, and measures how well each follows the full-res edge.
//
// cargo run --example guided_upsample

use meflut::imgio::{resize_bilinear, PlaneR};
use meflut::lut_engine::gfu_upsample;

/// Vertical step edge at `edge` (fraction of width) with a faint texture.
fn step(w: usize, h: usize, edge: f64) -> meflut::Result<PlaneR> {
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let base = if (x as f64 + 0.5) / (w as f64) < edge { 0.2 } else { 0.8 };
            base + 0.02 * ((x + 3 * y) % 5) as f64 / 5.0
        })
        .collect();
    PlaneR::new(w, h, data)
}

fn edge_error(up: &PlaneR, truth: &PlaneR) -> f64 {
    up.data().iter().zip(truth.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / up.data().len() as f64
}

pub fn run() -> meflut::Result<()> {
    let (lw, lh, s) = (32, 24, 4);
    let yfull = step(lw * s, lh * s, 0.45)?;
    let ylow = resize_bilinear(&yfull, lw, lh)?;
    // weight 1 on the dark side, 0 on the bright side
    let wlow = PlaneR::new(lw, lh, ylow.data().iter().map(|&v| if v < 0.5 { 1.0 } else { 0.0 }).collect())?;
    let truth = PlaneR::new(lw * s, lh * s, yfull.data().iter().map(|&v| if v < 0.5 { 1.0 } else { 0.0 }).collect())?;

    let guided = gfu_upsample(&wlow, &ylow, &yfull, 2, 1e-4)?;
    let bilinear = resize_bilinear(&wlow, lw * s, lh * s)?;
    println!("mean |w - ideal|: guided {:.4}, bilinear {:.4}", edge_error(&guided, &truth), edge_error(&bilinear, &truth));
    let row = lh * s / 2;
    let x0 = (0.45 * (lw * s) as f64) as usize - 4;
    let show = |p: &PlaneR| (x0..x0 + 8).map(|x| format!("{:.2}", p.get(x, row))).collect::<Vec<_>>().join(" ");
    println!("guided   {}", show(&guided));
    println!("bilinear {}", show(&bilinear));
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    run()
}
