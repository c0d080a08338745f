// Single-threaded timing of the LUT, network and baseline paths.
//
// cargo run --release --example benchmark -- 512,1024

use meflut::cli::{bench_table, run_bench, BenchConfig};

pub fn run(resolutions: Vec<usize>, repeat: usize) -> meflut::Result<()> {
    let results = run_bench(&BenchConfig { resolutions, repeat, ..Default::default() })?;
    print!("{}", bench_table(&results));
    for r in results.iter().filter(|r| r.method == "lut+gfu") {
        if let Some(net) = results.iter().find(|n| n.method == "network+gfu" && n.resolution == r.resolution) {
            println!("{}^2: LUT path {:.1}x faster than the network path", r.resolution, net.median_ms / r.median_ms);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> meflut::Result<()> {
    let resolutions = std::env::args()
        .nth(1)
        .map(|a| a.split(',').filter_map(|s| s.parse().ok()).collect())
        .unwrap_or_else(|| vec![512]);
    run(resolutions, 10)
}
