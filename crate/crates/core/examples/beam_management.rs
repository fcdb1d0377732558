//! One trial of beam management: the same drifting channel is handed to all
//! four schemes, and each prints what it measured and what it got.
//!
//! ```text
//! cargo run --example beam_management -- 24
//! ```
//! The optional argument is the SNR threshold in dB (default 24).

use hbf_bm::beam_mgmt::{initialize_with, run_scheme, BeamResponses, BmOptions, LinkBudget, Scheme};
use hbf_bm::channel::{draw_channel, evolve_channel};
use hbf_bm::sim::{trial_rng, SimConfig};
use hbf_bm::to_db;

fn main() -> hbf_bm::Result<()> {
    let threshold_db = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(24.0);
    let cfg = SimConfig::default();
    let cb = cfg.build_codebook()?;
    let budget = LinkBudget::from_db(0.0, threshold_db)?;
    let opts = BmOptions::default();
    let mut rng = trial_rng(cfg.master_seed, 3);

    let mut ch = draw_channel(&cfg.channel, &cfg.array.bs()?, &cfg.array.ue()?, &mut rng)?;
    let (state0, init) = initialize_with(&BeamResponses::with_depth(&cb, &ch, 1), &budget, cb.level_size(1));
    println!(
        "init: beams {:?} after {} slots, {:.2} dB, aligned {}",
        init.beams.iter().map(|k| k + 1).collect::<Vec<_>>(),
        init.searches,
        to_db(init.achieved_snr),
        init.aligned
    );

    let mut states = vec![state0; Scheme::ALL.len()];
    println!("\nthreshold {threshold_db} dB; per scheme: beams / searches / achieved dB");
    print!("{:>4}", "TTI");
    for s in Scheme::ALL {
        print!(" | {:<24}", s.as_str());
    }
    println!();
    for tti in 1..=8 {
        ch = evolve_channel(&ch, &cfg.evolution, &mut rng)?;
        let table = BeamResponses::with_depth(&cb, &ch, 1);
        print!("{tti:>4}");
        for (s, state) in Scheme::ALL.into_iter().zip(states.iter_mut()) {
            let r = run_scheme(s, state, &table, &cb, &budget, &opts)?;
            let beams: Vec<String> = r.beams.iter().map(|k| (k + 1).to_string()).collect();
            let mark = if r.aligned { ' ' } else { '!' };
            print!(
                " | {:>7} {:>2} {:>6.2}{mark}       ",
                beams.join(","),
                r.searches,
                to_db(r.achieved_snr)
            );
        }
        println!();
    }
    println!("\n! marks a TTI that ended below the threshold");
    Ok(())
}
