//! Draw a clustered channel, let it drift for a few TTIs and watch which
//! narrow beam each AiP would pick.
//!
//! ```text
//! cargo run --example channel -- 42
//! ```
//! The optional argument is the seed.

use hbf_bm::beam_mgmt::{BeamResponses, LinkBudget};
use hbf_bm::channel::{draw_channel, evolve_channel};
use hbf_bm::sim::{trial_rng, SimConfig};

fn main() -> hbf_bm::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let cfg = SimConfig::default();
    let cb = cfg.build_codebook()?;
    let budget = LinkBudget::from_db(0.0, 0.0)?;
    let mut rng = trial_rng(seed, 0);

    let mut ch = draw_channel(&cfg.channel, &cfg.array.bs()?, &cfg.array.ue()?, &mut rng)?;
    println!(
        "{} paths, H is {}x{}, |H|^2 / (N_bs N_ue) = {:.3}",
        ch.paths().len(),
        ch.h().nrows(),
        ch.h().ncols(),
        ch.h().norm_squared() / (ch.h().nrows() * ch.h().ncols()) as f64
    );

    println!("\n{:>4}  {:<32}  {:>12}", "TTI", "cluster BS azimuths [deg]", "best beams");
    for tti in 0..6 {
        if tti > 0 {
            ch = evolve_channel(&ch, &cfg.evolution, &mut rng)?;
        }
        let mut azimuths: Vec<String> = Vec::new();
        for p in ch.paths().iter().filter(|p| p.subpath == 0) {
            azimuths.push(format!("{:>6.1}", p.bs_dir.azimuth_offset().to_degrees()));
        }
        let table = BeamResponses::with_depth(&cb, &ch, 1);
        let best: Vec<String> = (0..ch.n_aips())
            .map(|aip| {
                (0..cb.level_size(1))
                    .max_by(|&a, &b| table.mrc_snr(&budget, 1, aip, a).total_cmp(&table.mrc_snr(&budget, 1, aip, b)))
                    .map_or(0, |k| k + 1)
                    .to_string()
            })
            .collect();
        println!("{tti:>4}  {:<32}  {:>12}", azimuths.join(" "), best.join(", "));
    }
    Ok(())
}
