//! Flat-top beam synthesis, step by step.
//!
//! A sinc sampled over the 16 columns gives amplitude targets; each column
//! then switches on enough unit-modulus elements to reach its target, and the
//! resulting grid is steered. The printout shows the column targets, the
//! element grid and the horizon pattern.
//!
//! ```text
//! cargo run --example flat_top_beam -- 3.5 -8
//! ```
//! Arguments: sinc width `a` (default 3.5) and steering angle in degrees
//! (default -8).

use hbf_bm::array::{linear_equivalent, AngleDirection, ArrayGeometry};
use hbf_bm::codebook::{azimuth_grid, horizon_gain_db, quantize_to_ura, sinc_linear_weights, steer_beam};

fn main() -> hbf_bm::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>());
    let width = args.next().and_then(Result::ok).unwrap_or(3.5);
    let steer_deg = args.next().and_then(Result::ok).unwrap_or(-8.0);

    let geom = ArrayGeometry::ura(16, 16, 0.5)?;
    let targets = sinc_linear_weights(16, 16, width)?;
    let base = quantize_to_ura(&targets, 16)?;

    println!("column targets for a = {width}:");
    for (h, (t, s)) in targets.iter().zip(linear_equivalent(&base)).enumerate() {
        println!("  col {h:>2}: target {t:>7.2}  realized {:>4.0}", s.re);
    }

    println!("\nelement grid (+/- on, . off), rows are vertical positions:");
    for v in 0..16 {
        let row: String = (0..16)
            .map(|h| match base.get(h, v).re {
                x if x > 0.5 => '+',
                x if x < -0.5 => '-',
                _ => '.',
            })
            .collect();
        println!("  {row}");
    }

    let beam = steer_beam(&base, &geom, AngleDirection::from_azimuth_offset(steer_deg.to_radians()))?;
    let grid = azimuth_grid(73);
    let gains = horizon_gain_db(&geom, &beam, &grid);
    let peak = gains.iter().cloned().fold(f64::MIN, f64::max);
    println!(
        "\nhorizon pattern steered to {steer_deg} deg ({} elements on), one # per dB above peak - 30:",
        beam.active_count()
    );
    for (psi, g) in grid.iter().zip(&gains) {
        let bars = ((g - peak + 30.0).max(0.0)).round() as usize;
        println!("  {:>6.1} {:>7.2} dB {}", psi.to_degrees(), g, "#".repeat(bars));
    }
    Ok(())
}
