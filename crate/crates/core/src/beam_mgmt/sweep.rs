//! Angle sweeping order around the previously used index.

use crate::{Error, Result};

/// `μ ← -μ - min(0, sign μ)`: walks the offsets +1, -1, +2, -2, ...
fn flip(mu: i64) -> i64 {
    -mu - mu.signum().min(0)
}

/// Sweep order over a level with `card` angles, given the previously used
/// 1-based index `nu`. Returns the other `card - 1` indices, 1-based.
///
/// Neighbours are visited alternately above and below `nu`, nearest first.
/// Once one end of the angle set is reached the remaining indices on the
/// other side follow in order. When `nu` is the last index the sweep simply
/// descends.
///
/// ```
/// use hbf_bm::beam_mgmt::sweep_sequence;
/// assert_eq!(
///     sweep_sequence(17, 5).unwrap(),
///     [6, 4, 7, 3, 8, 2, 9, 1, 10, 11, 12, 13, 14, 15, 16, 17]
/// );
/// ```
pub fn sweep_sequence(card: usize, nu: usize) -> Result<Vec<usize>> {
    if card < 2 {
        return Err(Error::Precondition(format!("card must be >= 2, got {card}")));
    }
    if nu < 1 || nu > card {
        return Err(Error::Precondition(format!("nu = {nu} outside 1..={card}")));
    }
    let mut m = Vec::with_capacity(card - 1);
    if nu < card {
        let (c, n) = (card as i64, nu as i64);
        m.push(nu + 1);
        let mut mu: i64 = 1;
        for _ in 3..=card {
            mu = flip(mu);
            let mut xi = n + mu;
            if xi > c || xi <= 0 {
                mu = flip(mu);
                xi = n + mu;
            }
            if xi > c || xi <= 0 {
                return Err(Error::Precondition(format!(
                    "sweep left the angle set at index {xi} (card {card}, nu {nu})"
                )));
            }
            m.push(xi as usize);
        }
    } else {
        m.extend((1..card).rev());
    }
    Ok(m)
}

/// 0-based counterpart of [`sweep_sequence`], for a level of size `card`
/// (any size, including 1) and previous index `nu`.
pub fn sweep_order(card: usize, nu: usize) -> Vec<usize> {
    if card < 2 {
        return Vec::new();
    }
    sweep_sequence(card, nu + 1)
        .expect("index within range")
        .into_iter()
        .map(|k| k - 1)
        .collect()
}

/// Members of `set` ordered for a search seeded at `seed`: the seed itself
/// first when it belongs to the set, then the rest in sweep order around it.
pub fn seeded_order(set: &[usize], card: usize, seed: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(set.len());
    if set.contains(&seed) {
        out.push(seed);
    }
    out.extend(sweep_order(card, seed).into_iter().filter(|k| set.contains(k)));
    out
}
