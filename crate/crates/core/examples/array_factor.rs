//! Horizon pattern of a planar array versus its column-sum linear array.
//!
//! On the horizon the vertical phase terms vanish, so a 16x16 panel with
//! constant-modulus weights radiates exactly like a 16-element line whose
//! weights are the column sums. This prints both patterns side by side for a
//! random weight grid and then steers a full-aperture beam.
//!
//! ```text
//! cargo run --example array_factor
//! ```

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hbf_bm::array::{array_factor, linear_equivalent, AngleDirection, ArrayGeometry, WeightMatrix};
use hbf_bm::codebook::dft_beam;

fn main() -> hbf_bm::Result<()> {
    let ura = ArrayGeometry::ura(16, 16, 0.5)?;
    let ula = ArrayGeometry::ula(16, 0.5)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let symbols = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let w = WeightMatrix::from_fn(16, 16, |_, _| symbols[rng.random_range(0..symbols.len())])?;
    let w_l = linear_equivalent(&w);

    println!("{} of 256 elements on", w.active_count());
    println!("{:>8} {:>12} {:>12} {:>10}", "az [deg]", "|AF| panel", "|AF| line", "diff");
    for deg in (-90..=90).step_by(15) {
        let dir = AngleDirection::from_azimuth_offset(f64::from(deg).to_radians());
        let panel = array_factor(&ura, w.as_slice(), dir)?;
        let line = array_factor(&ula, &w_l, dir)?;
        println!(
            "{deg:>8} {:>12.4} {:>12.4} {:>10.1e}",
            panel.norm(),
            line.norm(),
            (panel - line).norm()
        );
    }

    // off the horizon the equivalence no longer holds
    let tilted = AngleDirection::new(FRAC_PI_2 - 0.3, FRAC_PI_2)?;
    let gap = (array_factor(&ura, w.as_slice(), tilted)? - array_factor(&ula, &w_l, tilted)?).norm();
    println!("\n17 deg above the horizon the two differ by {gap:.3}");

    let target = AngleDirection::from_azimuth_offset(20f64.to_radians());
    let beam = dft_beam(&ura, target);
    println!("\nfull-aperture beam steered to 20 deg:");
    for deg in [0.0, 10.0, 16.0, 20.0, 24.0, 30.0] {
        let af = array_factor(&ura, beam.as_slice(), AngleDirection::from_azimuth_offset(f64::to_radians(deg)))?;
        println!("  {deg:>5.1} deg  {:>7.2} dB", 20.0 * af.norm().log10());
    }
    Ok(())
}
