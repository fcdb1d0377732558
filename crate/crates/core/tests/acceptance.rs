//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every line reaches the terminal
//! in order. The process exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hbf_bm::array::{array_factor, linear_equivalent, AngleDirection, ArrayGeometry, WeightMatrix};
use hbf_bm::beam_mgmt::{sweep_sequence, Scheme};
use hbf_bm::channel::{draw_channel, ChannelRealization};
use hbf_bm::codebook::{
    azimuth_grid, design_half_width, flatness_report, horizon_gain_db, steer_beam, HierarchicalCodebook,
};
use hbf_bm::sim::{run_monte_carlo, trial_rng, MetricsRecord, SimConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

// ---------------------------------------------------------------- 1

/// ULA array factor of column sums, written out from the definition.
fn linear_af(w_l: &[Complex64], spacing: f64, dir: AngleDirection) -> Complex64 {
    let u = dir.theta.sin() * dir.phi.cos();
    w_l.iter()
        .enumerate()
        .map(|(n, w)| w * Complex64::cis(-2.0 * PI * spacing * n as f64 * u))
        .sum()
}

fn equivalence_suite() -> Outcome {
    let start = Instant::now();
    let geom = ArrayGeometry::ura(16, 16, 0.5).unwrap();
    let alphabet = [
        zero(),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let w = WeightMatrix::from_fn(16, 16, |_, _| alphabet[rng.random_range(0..alphabet.len())]).unwrap();
        let l1: f64 = w.as_slice().iter().map(|x| x.norm()).sum();
        let w_l = linear_equivalent(&w);
        for s in 0..720 {
            let phi = -PI + 2.0 * PI * s as f64 / 720.0;
            let dir = AngleDirection::new(PI / 2.0, phi).unwrap();
            let af_r = array_factor(&geom, w.as_slice(), dir).unwrap();
            let err = (af_r - linear_af(&w_l, 0.5, dir)).norm();
            if l1 > 0.0 {
                worst = worst.max(err / l1);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 5.0,
        format!("max |AF_R - AF_L| / ||w||_1 = {worst:.2e} (<= 1e-9), {secs:.2} s (< 5 s)"),
    )
}

// ---------------------------------------------------------------- 2

fn ftb_flatness(cb: &HierarchicalCodebook) -> Outcome {
    let start = Instant::now();
    let geom = cb.geometry();
    let dft_peak_db = 10.0 * ((geom.n_h() * geom.n_v()) as f64).log10();
    let grid = azimuth_grid(3601);
    let mut worst_ripple = 0.0f64;
    let mut worst_floor = f64::INFINITY;
    for beam in &cb.level(2).beams {
        worst_ripple = worst_ripple.max(flatness_report(beam, geom, 3601).ripple_db);
        let half = design_half_width(beam, geom);
        let u0 = beam.center_azimuth.sin();
        let gains = horizon_gain_db(geom, &beam.weights, &grid);
        let floor = grid
            .iter()
            .zip(&gains)
            .filter(|(psi, _)| (psi.sin() - u0).abs() <= half)
            .map(|(_, g)| *g)
            .fold(f64::INFINITY, f64::min);
        worst_floor = worst_floor.min(floor);
    }
    let secs = start.elapsed().as_secs_f64();
    let below_peak = dft_peak_db - worst_floor;
    outcome(
        worst_ripple <= 3.0 && below_peak <= 10.0 && secs < 5.0,
        format!(
            "worst ripple {worst_ripple:.3} dB (<= 3), lowest in-band gain {below_peak:.2} dB under the \
             DFT peak (<= 10), {secs:.2} s"
        ),
    )
}

// ---------------------------------------------------------------- 3

/// The 16x16 reference weight matrix of the second wide beam, one row per
/// vertical index.
fn reference_wide_beam() -> WeightMatrix {
    let mut rows = vec![vec![zero(); 16]; 16];
    let one = Complex64::new(1.0, 0.0);
    for (r, row) in rows.iter_mut().enumerate() {
        if (5..12).contains(&r) {
            row[0] = -one;
            row[1] = match r {
                5 => one,
                11 => zero(),
                _ => -one,
            };
            row[2] = one;
        }
        for x in &mut row[7..11] {
            *x = -one;
        }
    }
    WeightMatrix::from_rows(&rows).unwrap()
}

fn reference_pattern(cb: &HierarchicalCodebook) -> Outcome {
    let geom = cb.geometry();
    let ours = cb.beam(2, 1).unwrap();
    let target = AngleDirection::from_azimuth_offset(ours.center_azimuth);
    let reference = steer_beam(&reference_wide_beam(), geom, target).unwrap();

    let half = design_half_width(ours, geom);
    let u0 = ours.center_azimuth.sin();
    let grid = azimuth_grid(3601);
    let af_db = |w: &WeightMatrix, psi: f64| {
        let af = array_factor(geom, w.as_slice(), AngleDirection::from_azimuth_offset(psi)).unwrap();
        20.0 * af.norm().max(1e-300).log10()
    };
    let in_band: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|psi| (psi.sin() - u0).abs() <= half)
        .collect();
    let mad = in_band
        .iter()
        .map(|&psi| (af_db(&ours.weights, psi) - af_db(&reference, psi)).abs())
        .sum::<f64>()
        / in_band.len() as f64;

    let sums_ours: Vec<f64> = linear_equivalent(&ours.weights).iter().map(|x| x.norm()).collect();
    let sums_ref: Vec<f64> = linear_equivalent(&reference).iter().map(|x| x.norm()).collect();
    let worst_col = sums_ours
        .iter()
        .zip(&sums_ref)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.0}")).collect::<Vec<_>>().join(" ");
    outcome(
        mad <= 2.0 && worst_col <= 1.0 + 1e-9,
        format!(
            "in-band MAD {mad:.2} dB (<= 2); worst column-sum gap {worst_col:.0} (<= 1); ours [{}] vs \
             reference [{}]",
            fmt(&sums_ours),
            fmt(&sums_ref)
        ),
    )
}

// ---------------------------------------------------------------- 4

fn sweep_oracle() -> Outcome {
    let mut bad = Vec::new();
    for card in 2..=32 {
        for nu in 1..=card {
            let mut seq = sweep_sequence(card, nu).unwrap();
            seq.sort_unstable();
            let expected: Vec<usize> = (1..=card).filter(|&k| k != nu).collect();
            if seq != expected {
                bad.push((card, nu));
            }
        }
    }
    let trace = sweep_sequence(17, 5).unwrap();
    let hand = [6, 4, 7, 3, 8, 2, 9, 1, 10, 11, 12, 13, 14, 15, 16, 17];
    outcome(
        bad.is_empty() && trace == hand,
        format!(
            "{} non-permutations over card 2..=32; (17, 5) trace {:?}",
            bad.len(),
            trace
        ),
    )
}

// ---------------------------------------------------------------- 5, 6

fn point(records: &[MetricsRecord], s: Scheme, tx: f64, th: f64) -> &MetricsRecord {
    records
        .iter()
        .find(|r| r.scheme == s && r.tx_snr_db == tx && r.gamma_th_db == th)
        .expect("full grid reported")
}

fn scheme_constants(records: &[MetricsRecord]) -> Outcome {
    let exh = records.iter().filter(|r| r.scheme == Scheme::Exhaustive);
    let ul = records.iter().filter(|r| r.scheme == Scheme::OnlyUl);
    let bad_exh = exh.filter(|r| r.avg_searches != 17.0 || r.ci95_searches != 0.0).count();
    let bad_ul = ul.filter(|r| r.avg_searches != 4.0 || r.ci95_searches != 0.0).count();
    outcome(
        bad_exh == 0 && bad_ul == 0,
        format!("grid points off the constant: exhaustive {bad_exh} (17), only_ul {bad_ul} (4)"),
    )
}

fn trends(cfg: &SimConfig, records: &[MetricsRecord], secs: f64) -> Outcome {
    let mut fails: Vec<String> = Vec::new();
    let grid = &cfg.gamma_th_db_grid;

    // (a) searches nondecreasing in the threshold, up to the CI
    for s in [Scheme::Proposed, Scheme::DlAssisted] {
        for &tx in &cfg.tx_snr_db {
            for pair in grid.windows(2) {
                let (lo, hi) = (point(records, s, tx, pair[0]), point(records, s, tx, pair[1]));
                let drop = lo.avg_searches - hi.avg_searches;
                if drop > lo.ci95_searches.max(hi.ci95_searches) {
                    fails.push(format!("a: {s} tx {tx} {}->{} dB drops {drop:.3}", pair[0], pair[1]));
                }
            }
        }
    }
    // (b) proposed <= dl_assisted <= 17 everywhere
    let mut worst_b = f64::NEG_INFINITY;
    for &tx in &cfg.tx_snr_db {
        for &th in grid {
            let p = point(records, Scheme::Proposed, tx, th).avg_searches;
            let d = point(records, Scheme::DlAssisted, tx, th).avg_searches;
            worst_b = worst_b.max(p - d);
            if p > d {
                fails.push(format!("b: tx {tx} th {th}: proposed {p:.3} > dl_assisted {d:.3}"));
            }
            if d > 17.0 {
                fails.push(format!("b: tx {tx} th {th}: dl_assisted {d:.3} > 17"));
            }
        }
    }
    // (c) exhaustive >= proposed >= only_ul in achieved SNR, up to the CI
    for &tx in &cfg.tx_snr_db {
        for &th in grid {
            let e = point(records, Scheme::Exhaustive, tx, th);
            let p = point(records, Scheme::Proposed, tx, th);
            let u = point(records, Scheme::OnlyUl, tx, th);
            for (hi, lo) in [(e, p), (p, u)] {
                if lo.avg_rx_snr_db - hi.avg_rx_snr_db > hi.ci95_db.max(lo.ci95_db) {
                    fails.push(format!(
                        "c: tx {tx} th {th}: {} {:.3} dB above {} {:.3} dB",
                        lo.scheme, lo.avg_rx_snr_db, hi.scheme, hi.avg_rx_snr_db
                    ));
                }
            }
        }
    }
    // (d) more transmit power never costs searches, up to the CI
    let (tx_lo, tx_hi) = (-1.0, 0.0);
    for s in Scheme::ALL {
        for &th in grid {
            let (lo, hi) = (point(records, s, tx_lo, th), point(records, s, tx_hi, th));
            if hi.avg_searches - lo.avg_searches > lo.ci95_searches.max(hi.ci95_searches) {
                fails.push(format!(
                    "d: {s} th {th}: {:.3} at 0 dB vs {:.3} at -1 dB",
                    hi.avg_searches, lo.avg_searches
                ));
            }
        }
    }
    if secs >= 600.0 {
        fails.push(format!("runtime {secs:.0} s"));
    }
    let first = grid.first().copied().unwrap_or(f64::NAN);
    let last = grid.last().copied().unwrap_or(f64::NAN);
    let align_lo = point(records, Scheme::Exhaustive, tx_lo, first).alignment_rate;
    let align_hi = point(records, Scheme::Exhaustive, tx_hi, last).alignment_rate;
    let mut detail = format!(
        "{} trials, {secs:.1} s; exhaustive alignment {:.0}% at {first} dB -> {:.0}% at {last} dB; \
         max proposed - dl_assisted searches {worst_b:+.3}",
        cfg.n_trials,
        100.0 * align_lo,
        100.0 * align_hi
    );
    if !fails.is_empty() {
        detail.push_str(&format!("; {} violations, first: {}", fails.len(), fails[0]));
        for f in &fails {
            eprintln!("    criterion 6 {f}");
        }
    }
    outcome(fails.is_empty(), detail)
}

// ---------------------------------------------------------------- 7

/// `H` rebuilt element by element from the path list.
fn rebuild(ch: &ChannelRealization) -> Vec<Complex64> {
    let panel = ch.bs().panel();
    let (n_bs, n_v, d) = (panel.len(), panel.n_v(), panel.spacing());
    let n_ue = ch.ue().len();
    let d_ue = ch.ue().spacing();
    let mut h = vec![zero(); n_bs * n_ue];
    for p in ch.paths() {
        let g = p.power.sqrt() * Complex64::cis(-2.0 * PI * p.delay_s * ch.carrier_hz());
        let (tb, fb) = (p.bs_dir.theta, p.bs_dir.phi);
        let (tu, fu) = (p.ue_dir.theta, p.ue_dir.phi);
        for c in 0..n_ue {
            let ue_phase = 2.0 * PI * d_ue * c as f64 * tu.sin() * fu.cos();
            for r in 0..n_bs {
                let (col, row) = (r / n_v, r % n_v);
                let bs_phase = 2.0 * PI * d * (row as f64 * tb.cos() + col as f64 * tb.sin() * fb.cos());
                h[c * n_bs + r] += g * Complex64::cis(bs_phase - ue_phase);
            }
        }
    }
    h
}

fn channel_invariants(cfg: &SimConfig) -> Outcome {
    let bs = cfg.array.bs().unwrap();
    let ue = cfg.array.ue().unwrap();
    let mut worst = 0.0f64;
    let mut energy = 0.0;
    let draws = 1000;
    for i in 0..draws {
        let mut rng = trial_rng(77, i);
        let ch = draw_channel(&cfg.channel, &bs, &ue, &mut rng).unwrap();
        let h = ch.h();
        energy += h.norm_squared();
        if i < 100 {
            let oracle = rebuild(&ch);
            let diff: f64 = h.iter().zip(&oracle).map(|(a, b)| (a - b).norm_sqr()).sum();
            let norm: f64 = oracle.iter().map(|x| x.norm_sqr()).sum();
            worst = worst.max((diff / norm).sqrt());
        }
    }
    let ratio = energy / draws as f64 / (bs.len() * ue.len()) as f64;
    outcome(
        worst <= 1e-10 && (0.95..=1.05).contains(&ratio),
        format!("reconstruction error {worst:.2e} (<= 1e-10), E||H||^2/(N_bs N_ue) = {ratio:.4} (0.95..1.05)"),
    )
}

// ---------------------------------------------------------------- 8

fn simulate_twice() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "n_trials = 40\nn_ttis_per_trial = 5\ngamma_th_db_grid = [20.0, 26.0, 32.0]\nmaster_seed = 9\n",
    )
    .unwrap();
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_hbf-bm"))
            .arg("simulate")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (ra, rb) = (run(&a), run(&b));
    if !ra.status.success() || !rb.status.success() {
        return outcome(
            false,
            format!("simulate failed: {}", String::from_utf8_lossy(&ra.stderr).trim()),
        );
    }
    let mut same = true;
    let mut bytes = 0;
    for name in [hbf_bm::io::SNR_CSV, hbf_bm::io::SEARCHES_CSV] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        bytes += x.len();
        same &= x == y;
    }
    outcome(same, format!("two runs, {bytes} CSV bytes each, identical: {same}"))
}

// ----------------------------------------------------------------

fn main() {
    let cfg = SimConfig::default();
    let cb = cfg.build_codebook().unwrap();

    let start = Instant::now();
    let records = run_monte_carlo(&cfg).unwrap();
    let mc_secs = start.elapsed().as_secs_f64();

    let results = [
        ("URA / linear-equivalent pattern equivalence", equivalence_suite()),
        ("flat-top beam flatness", ftb_flatness(&cb)),
        ("reference wide-beam matrix", reference_pattern(&cb)),
        ("sweep order oracle", sweep_oracle()),
        ("scheme search constants", scheme_constants(&records)),
        ("Monte Carlo trends", trends(&cfg, &records, mc_secs)),
        ("channel invariants", channel_invariants(&cfg)),
        ("simulate determinism", simulate_twice()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
