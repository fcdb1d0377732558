//! Run a reduced Monte Carlo grid and print both figure-style tables.
//!
//! ```text
//! cargo run --release --example monte_carlo -- 300
//! cargo run --release --example monte_carlo -- 300 --wide-beam-pruning
//! ```
//! The optional number is the trial count (default 200). The flag switches
//! the proposed scheme to the variant that also measures the wide beams.

use std::time::Instant;

use hbf_bm::beam_mgmt::Scheme;
use hbf_bm::sim::{run_monte_carlo, SimConfig};

fn main() -> hbf_bm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = SimConfig {
        n_trials: args.iter().find_map(|a| a.parse().ok()).unwrap_or(200),
        ..SimConfig::default()
    };
    cfg.beam_management.wide_beam_pruning = args.iter().any(|a| a == "--wide-beam-pruning");
    let start = Instant::now();
    let records = run_monte_carlo(&cfg)?;
    println!(
        "{} trials x {} TTIs, {} grid points in {:.1} s\n",
        cfg.n_trials,
        cfg.n_ttis_per_trial,
        records.len(),
        start.elapsed().as_secs_f64()
    );

    for &tx in &cfg.tx_snr_db {
        println!("transmit SNR {tx} dB");
        print!("{:>8}", "th [dB]");
        for s in Scheme::ALL {
            print!(" | {:>22}", s.as_str());
        }
        println!();
        for &th in &cfg.gamma_th_db_grid {
            print!("{th:>8.1}");
            for s in Scheme::ALL {
                let r = records
                    .iter()
                    .find(|r| r.scheme == s && r.tx_snr_db == tx && r.gamma_th_db == th)
                    .expect("every grid point is reported");
                print!(
                    " | {:>6.2} dB {:>5.2} {:>4.0}%",
                    r.avg_rx_snr_db,
                    r.avg_searches,
                    100.0 * r.alignment_rate
                );
            }
            println!();
        }
        println!();
    }
    Ok(())
}
