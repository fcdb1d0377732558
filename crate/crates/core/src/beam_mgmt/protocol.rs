//! Initialization sweep and the per-TTI schemes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::codebook::HierarchicalCodebook;
use crate::{from_db, Error, Result};

use super::snr::BeamResponses;
use super::sweep::{seeded_order, sweep_order};
use super::{BmState, LinkBudget, Scheme, TtiResult};

/// CTSs reserved for the UL sweep at the start of every TTI.
pub const UL_CTS: usize = 4;

/// Above this many joint configurations the exhaustive scheme switches from
/// enumeration to coordinate ascent.
const JOINT_ENUMERATION_LIMIT: usize = 250_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BmOptions {
    /// Extension of the proposed scheme: measure each wide beam before
    /// descending into it and skip its subtree when the summed SNR falls more
    /// than `pruning_backoff_db` below the threshold. All AiPs then follow a
    /// common ordering seeded from AiP 0.
    pub wide_beam_pruning: bool,
    pub pruning_backoff_db: f64,
}

impl Default for BmOptions {
    fn default() -> Self {
        Self {
            wide_beam_pruning: false,
            pruning_backoff_db: 12.0,
        }
    }
}

/// Initial access: all AiPs sweep the narrow beams in ascending order with
/// MRC at the UE, stopping as soon as the best-so-far per-AiP configuration
/// meets the threshold or after `max_cts` slots.
pub fn initialize(
    cb: &HierarchicalCodebook,
    ch: &ChannelRealization,
    budget: &LinkBudget,
    max_cts: usize,
) -> (BmState, TtiResult) {
    initialize_with(&BeamResponses::with_depth(cb, ch, 1), budget, max_cts)
}

pub fn initialize_with(
    table: &BeamResponses,
    budget: &LinkBudget,
    max_cts: usize,
) -> (BmState, TtiResult) {
    let n_aips = table.n_aips();
    let mut state = BmState::new(vec![0; n_aips], unit_vector(table.n_ue()));
    let mut best = vec![(0usize, f64::NEG_INFINITY); n_aips];
    let mut aligned = false;
    for k in 0..table.level_size(1).min(max_cts.max(1)) {
        state.cts_counter += 1;
        for (aip, b) in best.iter_mut().enumerate() {
            let g = table.mrc_snr(budget, 1, aip, k);
            state.record(aip, 1, k, g);
            if g > b.1 {
                *b = (k, g);
            }
        }
        if best.iter().map(|b| b.1).sum::<f64>() >= budget.snr_threshold {
            aligned = true;
            break;
        }
    }
    let beams: Vec<usize> = best.iter().map(|b| b.0).collect();
    let achieved_snr = best.iter().map(|b| b.1).sum();
    state.v_mrt = table.mrt(&beams);
    state.nu = beams.clone();
    state.aligned = aligned;
    let result = TtiResult {
        scheme: None,
        aligned,
        beams,
        searches: state.cts_counter,
        achieved_snr,
    };
    (state, result)
}

fn unit_vector(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    if let Some(x) = v.first_mut() {
        *x = Complex64::new(1.0, 0.0);
    }
    v
}

/// One TTI of `scheme` on a precomputed response table.
///
/// The table must hold every level when the wide-beam pruning extension is
/// enabled; otherwise level 1 is enough.
pub fn run_scheme(
    scheme: Scheme,
    state: &mut BmState,
    table: &BeamResponses,
    cb: &HierarchicalCodebook,
    budget: &LinkBudget,
    opts: &BmOptions,
) -> Result<TtiResult> {
    if state.nu.len() != table.n_aips() || state.v_mrt.len() != table.n_ue() {
        return Err(Error::Precondition("state does not match the channel".into()));
    }
    state.begin_tti();
    let beams_aligned = match scheme {
        Scheme::Exhaustive => exhaustive(state, table, budget),
        Scheme::OnlyUl => {
            let (_, best) = ul_phase(state, table, budget);
            let sum: f64 = best.iter().map(|b| b.1).sum();
            (best.iter().map(|b| b.0).collect(), sum >= budget.snr_threshold)
        }
        Scheme::DlAssisted => {
            let (orders, best) = ul_phase(state, table, budget);
            if ul_accepted(&best, budget) {
                (best.iter().map(|b| b.0).collect(), true)
            } else {
                let lists = orders
                    .iter()
                    .zip(&state.nu)
                    .map(|(m, &nu)| {
                        std::iter::once(nu)
                            .chain(m.iter().skip(UL_CTS).copied())
                            .collect()
                    })
                    .collect();
                dl_sweep(state, table, budget, lists)
            }
        }
        Scheme::Proposed => {
            let (orders, best) = ul_phase(state, table, budget);
            if ul_accepted(&best, budget) {
                (best.iter().map(|b| b.0).collect(), true)
            } else if opts.wide_beam_pruning {
                if table.depth() < cb.depth() {
                    return Err(Error::Precondition(
                        "wide-beam pruning needs responses for every level".into(),
                    ));
                }
                pruned_search(state, table, cb, budget, opts, &best)
            } else {
                let lists = (0..table.n_aips())
                    .map(|aip| {
                        let swept: Vec<usize> = orders[aip].iter().take(UL_CTS).copied().collect();
                        hierarchical_order(cb, best[aip].0, &swept)
                    })
                    .collect();
                dl_sweep(state, table, budget, lists)
            }
        }
    };
    let (beams, aligned) = beams_aligned;
    Ok(finish(state, table, budget, scheme, beams, aligned))
}

fn ul_accepted(best: &[(usize, f64)], budget: &LinkBudget) -> bool {
    best.iter().map(|b| b.1).sum::<f64>() >= budget.snr_threshold
}

/// The four UL CTSs: each AiP sweeps the neighbours of its previous beam.
/// Returns the full per-AiP sweep orders and the per-AiP maxima.
fn ul_phase(
    state: &mut BmState,
    table: &BeamResponses,
    budget: &LinkBudget,
) -> (Vec<Vec<usize>>, Vec<(usize, f64)>) {
    let k1 = table.level_size(1);
    let orders: Vec<Vec<usize>> = state.nu.iter().map(|&nu| sweep_order(k1, nu)).collect();
    for j in 0..UL_CTS {
        state.cts_counter += 1;
        for (aip, m) in orders.iter().enumerate() {
            if let Some(&k) = m.get(j) {
                let g = table.snr(budget, 1, aip, k, &state.v_mrt);
                state.record(aip, 1, k, g);
            }
        }
    }
    let best = state.best_cached(table.n_aips());
    (orders, best)
}

/// Level-1 search order of one AiP in the DL phase.
///
/// The top level is ordered around the beam covering the best UL angle,
/// and each level below is visited set by set inside its parent, seeded at
/// the ancestor of the best UL angle on that level (the angle itself on the
/// narrow level). Angles already measured in the UL phase, or reached
/// through an earlier overlapping set, are skipped.
fn hierarchical_order(cb: &HierarchicalCodebook, ul_best: usize, swept: &[usize]) -> Vec<usize> {
    let k1 = cb.level_size(1);
    let mut seen = vec![false; k1];
    for &k in swept {
        seen[k] = true;
    }
    let mut out = Vec::with_capacity(k1);
    let depth = cb.depth();
    if depth == 1 {
        let all: Vec<usize> = (0..k1).collect();
        for k in seeded_order(&all, k1, ul_best) {
            if !seen[k] {
                seen[k] = true;
                out.push(k);
            }
        }
        return out;
    }
    let anchors = cb.ancestry(ul_best);
    let top: Vec<usize> = (0..cb.level_size(depth)).collect();
    for t in seeded_order(&top, top.len(), anchors[depth - 1]) {
        expand(cb, depth, t, &anchors, &mut seen, &mut out);
    }
    out
}

fn expand(
    cb: &HierarchicalCodebook,
    level: usize,
    index: usize,
    anchors: &[usize],
    seen: &mut [bool],
    out: &mut Vec<usize>,
) {
    let below = level - 1;
    let children = cb.children(level, index);
    if below == 1 {
        let open: Vec<usize> = children.iter().copied().filter(|&k| !seen[k]).collect();
        for k in seeded_order(&open, cb.level_size(1), anchors[0]) {
            seen[k] = true;
            out.push(k);
        }
    } else {
        for c in seeded_order(children, cb.level_size(below), anchors[below - 1]) {
            expand(cb, below, c, anchors, seen, out);
        }
    }
}

/// DL CTSs: at slot `n` every AiP measures entry `n` of its own list, and
/// the search stops once the summed SNR of the slot meets the threshold.
/// On failure the per-AiP best measured beams are kept.
fn dl_sweep(
    state: &mut BmState,
    table: &BeamResponses,
    budget: &LinkBudget,
    lists: Vec<Vec<usize>>,
) -> (Vec<usize>, bool) {
    let n_aips = table.n_aips();
    let len = lists.iter().map(Vec::len).max().unwrap_or(0);
    for n in 0..len {
        state.cts_counter += 1;
        let fallback = state.best_cached(n_aips);
        let mut beams = Vec::with_capacity(n_aips);
        let mut sum = 0.0;
        for (aip, list) in lists.iter().enumerate() {
            let (k, g) = match list.get(n) {
                Some(&k) => {
                    let g = table.snr(budget, 1, aip, k, &state.v_mrt);
                    state.record(aip, 1, k, g);
                    (k, g)
                }
                None => fallback[aip],
            };
            beams.push(k);
            sum += g;
        }
        if sum >= budget.snr_threshold {
            return (beams, true);
        }
    }
    let best = state.best_cached(n_aips);
    (best.iter().map(|b| b.0).collect(), false)
}

/// Extension: hierarchical search with a common ordering that measures the
/// wide beams too and prunes weak subtrees.
fn pruned_search(
    state: &mut BmState,
    table: &BeamResponses,
    cb: &HierarchicalCodebook,
    budget: &LinkBudget,
    opts: &BmOptions,
    ul_best: &[(usize, f64)],
) -> (Vec<usize>, bool) {
    let depth = cb.depth();
    let floor = budget.snr_threshold * from_db(-opts.pruning_backoff_db);
    let anchors = cb.ancestry(ul_best[0].0);
    let nu_prev = state.nu[0];
    let top: Vec<usize> = (0..cb.level_size(depth)).collect();
    let mut stack: Vec<(usize, usize)> = seeded_order(&top, top.len(), anchors[depth - 1])
        .into_iter()
        .rev()
        .map(|t| (depth, t))
        .collect();
    while let Some((level, index)) = stack.pop() {
        if level == 1 {
            let n_aips = table.n_aips();
            if (0..n_aips).all(|aip| state.snr_cache.contains_key(&(aip, 1, index))) {
                continue;
            }
            state.cts_counter += 1;
            let mut sum = 0.0;
            for aip in 0..n_aips {
                let g = match state.snr_cache.get(&(aip, 1, index)) {
                    Some(&g) => g,
                    None => {
                        let g = table.snr(budget, 1, aip, index, &state.v_mrt);
                        state.record(aip, 1, index, g);
                        g
                    }
                };
                sum += g;
            }
            if sum >= budget.snr_threshold {
                return (vec![index; n_aips], true);
            }
            continue;
        }
        state.cts_counter += 1;
        let sum: f64 = (0..table.n_aips())
            .map(|aip| {
                let g = table.snr(budget, level, aip, index, &state.v_mrt);
                state.record(aip, level, index, g);
                g
            })
            .sum();
        if sum < floor {
            continue;
        }
        let below = level - 1;
        let seed = if below == 1 { nu_prev } else { anchors[below - 1] };
        let order = seeded_order(cb.children(level, index), cb.level_size(below), seed);
        stack.extend(order.into_iter().rev().map(|c| (below, c)));
    }
    let best = state.best_cached(table.n_aips());
    (best.iter().map(|b| b.0).collect(), false)
}

/// Measure every narrow beam, then pick the joint configuration with the
/// largest MRT sum SNR.
fn exhaustive(state: &mut BmState, table: &BeamResponses, budget: &LinkBudget) -> (Vec<usize>, bool) {
    let k1 = table.level_size(1);
    for k in 0..k1 {
        state.cts_counter += 1;
        for aip in 0..table.n_aips() {
            let g = table.snr(budget, 1, aip, k, &state.v_mrt);
            state.record(aip, 1, k, g);
        }
    }
    let beams = joint_best(table, budget);
    let aligned = table.mrt_sum_snr(budget, &beams) >= budget.snr_threshold;
    (beams, aligned)
}

fn joint_best(table: &BeamResponses, budget: &LinkBudget) -> Vec<usize> {
    let (k1, m) = (table.level_size(1), table.n_aips());
    let total = (0..m).try_fold(1usize, |acc, _| acc.checked_mul(k1));
    let mut sel = vec![0; m];
    if total.is_some_and(|t| t <= JOINT_ENUMERATION_LIMIT) {
        let mut best = (f64::NEG_INFINITY, sel.clone());
        loop {
            let g = table.mrt_sum_snr(budget, &sel);
            if g > best.0 {
                best = (g, sel.clone());
            }
            // odometer increment
            let mut pos = 0;
            while pos < m {
                sel[pos] += 1;
                if sel[pos] < k1 {
                    break;
                }
                sel[pos] = 0;
                pos += 1;
            }
            if pos == m {
                return best.1;
            }
        }
    }
    // start from the per-AiP MRC argmax, then improve one AiP at a time
    for (aip, s) in sel.iter_mut().enumerate() {
        *s = (0..k1)
            .max_by(|&a, &b| table.mrc_snr(budget, 1, aip, a).total_cmp(&table.mrc_snr(budget, 1, aip, b)))
            .unwrap_or(0);
    }
    let mut current = table.mrt_sum_snr(budget, &sel);
    loop {
        let mut improved = false;
        for aip in 0..m {
            let k = best_for(table, budget, &sel, aip);
            let mut trial = sel.clone();
            trial[aip] = k;
            let g = table.mrt_sum_snr(budget, &trial);
            if g > current {
                sel = trial;
                current = g;
                improved = true;
            }
        }
        if !improved {
            return sel;
        }
    }
}

fn best_for(table: &BeamResponses, budget: &LinkBudget, sel: &[usize], aip: usize) -> usize {
    let mut trial = sel.to_vec();
    (0..table.level_size(1))
        .max_by(|&a, &b| {
            trial[aip] = a;
            let ga = table.mrt_sum_snr(budget, &trial);
            trial[aip] = b;
            let gb = table.mrt_sum_snr(budget, &trial);
            ga.total_cmp(&gb)
        })
        .unwrap_or(sel[aip])
}

fn finish(
    state: &mut BmState,
    table: &BeamResponses,
    budget: &LinkBudget,
    scheme: Scheme,
    beams: Vec<usize>,
    aligned: bool,
) -> TtiResult {
    let achieved_snr = table.mrt_sum_snr(budget, &beams);
    state.v_mrt = table.mrt(&beams);
    state.nu = beams.clone();
    state.aligned = aligned;
    TtiResult {
        scheme: Some(scheme),
        aligned,
        beams,
        searches: state.cts_counter,
        achieved_snr,
    }
}

fn table_for(cb: &HierarchicalCodebook, ch: &ChannelRealization) -> BeamResponses {
    BeamResponses::with_depth(cb, ch, 1)
}

/// One TTI of the proposed multi-level scheme.
pub fn run_tti(
    state: &mut BmState,
    cb: &HierarchicalCodebook,
    ch: &ChannelRealization,
    budget: &LinkBudget,
) -> Result<TtiResult> {
    run_scheme(Scheme::Proposed, state, &table_for(cb, ch), cb, budget, &BmOptions::default())
}

/// Exhaustive narrow-beam search; independent of any previous state.
pub fn exhaustive_search(
    cb: &HierarchicalCodebook,
    ch: &ChannelRealization,
    budget: &LinkBudget,
) -> TtiResult {
    let table = table_for(cb, ch);
    let mut state = BmState::new(vec![0; table.n_aips()], unit_vector(table.n_ue()));
    run_scheme(Scheme::Exhaustive, &mut state, &table, cb, budget, &BmOptions::default())
        .expect("fresh state matches the channel")
}

pub fn only_ul(
    state: &mut BmState,
    cb: &HierarchicalCodebook,
    ch: &ChannelRealization,
    budget: &LinkBudget,
) -> Result<TtiResult> {
    run_scheme(Scheme::OnlyUl, state, &table_for(cb, ch), cb, budget, &BmOptions::default())
}

pub fn dl_assisted_ul(
    state: &mut BmState,
    cb: &HierarchicalCodebook,
    ch: &ChannelRealization,
    budget: &LinkBudget,
) -> Result<TtiResult> {
    run_scheme(Scheme::DlAssisted, state, &table_for(cb, ch), cb, budget, &BmOptions::default())
}
