//! Build the default three-level codebook and show how the levels nest.
//!
//! ```text
//! cargo run --example codebook -- codebook.json
//! ```
//! With a path argument the codebook is also written there as JSON.

use std::path::Path;

use hbf_bm::codebook::{flatness_report, write_codebook, COVERAGE_GRID_POINTS};
use hbf_bm::sim::SimConfig;

fn main() -> hbf_bm::Result<()> {
    let cfg = SimConfig::default();
    let cb = cfg.build_codebook()?;
    let geom = cb.geometry();

    for level in cb.levels() {
        let ell = level.beams[0].level;
        println!("level {ell}: {} beams", level.beams.len());
        for (k, beam) in level.beams.iter().enumerate() {
            let flat = flatness_report(beam, geom, COVERAGE_GRID_POINTS);
            let children = level
                .children
                .get(k)
                .map(|c| format!("  covers {:?}", c.iter().map(|i| i + 1).collect::<Vec<_>>()))
                .unwrap_or_default();
            println!(
                "  #{:<2} at {:>6.1} deg, flat {:>6.1}..{:>5.1} deg, ripple {:.2} dB, {} on{children}",
                k + 1,
                beam.center_azimuth.to_degrees(),
                flat.flat_lo_deg,
                flat.flat_hi_deg,
                flat.ripple_db,
                beam.weights.active_count()
            );
        }
    }

    println!("\nnarrow beam -> covering wide beams:");
    for k in 0..cb.level_size(1) {
        let chain: Vec<usize> = cb.ancestry(k).iter().map(|i| i + 1).collect();
        println!("  {:>2} -> {:?}", k + 1, &chain[1..]);
    }

    if let Some(path) = std::env::args().nth(1) {
        write_codebook(&cb, Path::new(&path))?;
        println!("\nwritten to {path}");
    }
    Ok(())
}
