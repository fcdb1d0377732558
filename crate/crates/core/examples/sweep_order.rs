//! Angle sweeping order around the previously used beam.
//!
//! ```text
//! cargo run --example sweep_order -- 17 5
//! ```
//! Arguments: number of angles and the 1-based previous index.

use hbf_bm::beam_mgmt::{seeded_order, sweep_sequence};

fn main() -> hbf_bm::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>());
    let card = args.next().and_then(Result::ok).unwrap_or(17);
    let nu = args.next().and_then(Result::ok).unwrap_or(5);

    let seq = sweep_sequence(card, nu)?;
    println!("card {card}, previous {nu}:");
    println!("  {}", seq.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "));
    println!("  first four (uplink slots): {:?}", &seq[..seq.len().min(4)]);

    println!("\nevery start point for card {card}:");
    for start in 1..=card {
        let s = sweep_sequence(card, start)?;
        let shown: Vec<String> = s.iter().take(8).map(|k| format!("{k:>2}")).collect();
        println!("  {start:>2}: {} ...", shown.join(" "));
    }

    // inside a subset, the seed goes first when it belongs to the subset
    let subset = [5, 6, 7, 8, 9];
    let ordered: Vec<usize> = seeded_order(&subset, card, nu - 1).iter().map(|k| k + 1).collect();
    println!("\nnarrow beams 6..=10 ordered around {nu}: {ordered:?}");
    Ok(())
}
