//! Paired-seed Monte Carlo harness.
//!
//! Every trial draws one channel and evolves it for `n_ttis_per_trial` TTIs
//! from its own random stream (derived from the master seed and the trial
//! index only). All schemes, transmit SNRs and thresholds replay that same
//! channel sequence, so scheme comparisons are paired realization by
//! realization. Each grid point starts with an initialization sweep on the
//! first realization, which is not counted in the metrics, followed by one
//! beam-management run per TTI.
//!
//! Confidence intervals are 95% normal half-widths over per-trial means.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::beam_mgmt::{initialize_with, run_scheme, BeamResponses, BmOptions, LinkBudget, Scheme};
use crate::channel::{draw_channel, evolve_channel, BsPanel, ClusterParams, EvolveOptions};
use crate::codebook::{build_codebook, HierarchicalCodebook, LevelSpec};
use crate::{from_db, to_db, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    /// Elements per AiP along the horizontal axis.
    pub n_h: usize,
    pub n_v: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub n_aips: usize,
    /// UE antennas (a ULA).
    pub n_ue: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            n_h: 16,
            n_v: 16,
            spacing: 0.5,
            n_aips: 2,
            n_ue: 4,
        }
    }
}

impl ArrayConfig {
    pub fn aip(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::ura(self.n_h, self.n_v, self.spacing)
    }

    pub fn bs(&self) -> Result<BsPanel> {
        BsPanel::new(self.aip()?, self.n_aips)
    }

    pub fn ue(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::ula(self.n_ue, self.spacing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// `P / σ²` values in dB.
    pub tx_snr_db: Vec<f64>,
    pub gamma_th_db_grid: Vec<f64>,
    /// Per-TTI offsets (dB) added to the threshold, used cyclically; empty
    /// means a constant threshold.
    pub gamma_th_schedule_db: Vec<f64>,
    pub n_trials: usize,
    pub n_ttis_per_trial: usize,
    pub schemes: Vec<Scheme>,
    /// CTS budget of the initialization sweep; `None` allows every narrow
    /// beam.
    pub init_max_cts: Option<usize>,
    pub master_seed: u64,
    pub array: ArrayConfig,
    pub codebook: Vec<LevelSpec>,
    pub channel: ClusterParams,
    pub evolution: EvolveOptions,
    pub beam_management: BmOptions,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tx_snr_db: vec![-1.0, 0.0],
            gamma_th_db_grid: (0..=10).map(|k| 18.0 + 2.0 * k as f64).collect(),
            gamma_th_schedule_db: Vec::new(),
            n_trials: 2000,
            n_ttis_per_trial: 10,
            schemes: Scheme::ALL.to_vec(),
            init_max_cts: None,
            master_seed: 2021,
            array: ArrayConfig::default(),
            codebook: LevelSpec::default_levels(),
            channel: ClusterParams::default(),
            evolution: EvolveOptions::default(),
            beam_management: BmOptions::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        if self.n_ttis_per_trial < 1 {
            return Err(Error::invalid("n_ttis_per_trial", "must be at least 1"));
        }
        if self.tx_snr_db.is_empty() || self.tx_snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("tx_snr_db", "must be a non-empty list of finite values"));
        }
        if self.gamma_th_db_grid.is_empty() || self.gamma_th_db_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid(
                "gamma_th_db_grid",
                "must be a non-empty list of finite values",
            ));
        }
        if self.gamma_th_schedule_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("gamma_th_schedule_db", "values must be finite"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("schemes", "select at least one scheme"));
        }
        if self.init_max_cts == Some(0) {
            return Err(Error::invalid("init_max_cts", "must be at least 1"));
        }
        if self.array.n_ue == 0 {
            return Err(Error::invalid("array.n_ue", "must be at least 1"));
        }
        self.array.bs()?;
        self.channel.validate()?;
        self.evolution.validate()?;
        if !(self.beam_management.pruning_backoff_db >= 0.0) {
            return Err(Error::invalid("pruning_backoff_db", "must be >= 0"));
        }
        Ok(())
    }

    pub fn build_codebook(&self) -> Result<HierarchicalCodebook> {
        build_codebook(&self.array.aip()?, &self.codebook)
    }

    fn threshold_db(&self, gamma_th_db: f64, tti: usize) -> f64 {
        match self.gamma_th_schedule_db.len() {
            0 => gamma_th_db,
            n => gamma_th_db + self.gamma_th_schedule_db[(tti - 1) % n],
        }
    }
}

/// Aggregate metrics of one `(scheme, tx_snr, γ_th)` grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub scheme: Scheme,
    pub tx_snr_db: f64,
    pub gamma_th_db: f64,
    /// Mean over TTIs of the achieved sum SNR, in dB.
    pub avg_rx_snr_db: f64,
    pub ci95_db: f64,
    pub avg_searches: f64,
    pub ci95_searches: f64,
    pub alignment_rate: f64,
    pub n_trials: usize,
}

/// Per-trial means at one grid point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct TrialPoint {
    rx_snr_db: f64,
    searches: f64,
    aligned: f64,
}

/// Random stream of trial `trial`, independent of everything but the master
/// seed.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

struct Setup {
    cb: HierarchicalCodebook,
    bs: BsPanel,
    ue: ArrayGeometry,
    depth: usize,
}

/// Response tables of one trial's channel sequence; entry 0 is the
/// initialization TTI.
fn trial_tables(cfg: &SimConfig, setup: &Setup, trial: u64) -> Result<Vec<BeamResponses>> {
    let mut rng = trial_rng(cfg.master_seed, trial);
    let mut ch = draw_channel(&cfg.channel, &setup.bs, &setup.ue, &mut rng)?;
    let mut tables = Vec::with_capacity(cfg.n_ttis_per_trial + 1);
    tables.push(BeamResponses::with_depth(&setup.cb, &ch, setup.depth));
    for _ in 0..cfg.n_ttis_per_trial {
        ch = evolve_channel(&ch, &cfg.evolution, &mut rng)?;
        tables.push(BeamResponses::with_depth(&setup.cb, &ch, setup.depth));
    }
    Ok(tables)
}

/// Grid points in output order: scheme-major, then transmit SNR, then
/// threshold.
fn grid(cfg: &SimConfig) -> Vec<(Scheme, f64, f64)> {
    let mut points = Vec::new();
    for &scheme in &cfg.schemes {
        for &tx in &cfg.tx_snr_db {
            for &th in &cfg.gamma_th_db_grid {
                points.push((scheme, tx, th));
            }
        }
    }
    points
}

fn run_trial(cfg: &SimConfig, setup: &Setup, trial: u64) -> Result<Vec<TrialPoint>> {
    let tables = trial_tables(cfg, setup, trial)?;
    let init_cts = cfg.init_max_cts.unwrap_or(usize::MAX);
    let n = cfg.n_ttis_per_trial as f64;
    grid(cfg)
        .into_iter()
        .map(|(scheme, tx, th)| {
            let budget = LinkBudget::from_db(tx, cfg.threshold_db(th, 1))?;
            let (mut state, _) = initialize_with(&tables[0], &budget, init_cts);
            let mut acc = TrialPoint::default();
            for (tti, table) in tables.iter().enumerate().skip(1) {
                let budget = budget.with_threshold(from_db(cfg.threshold_db(th, tti)));
                let r = run_scheme(scheme, &mut state, table, &setup.cb, &budget, &cfg.beam_management)?;
                acc.rx_snr_db += to_db(r.achieved_snr);
                acc.searches += r.searches as f64;
                acc.aligned += f64::from(u8::from(r.aligned));
            }
            Ok(TrialPoint {
                rx_snr_db: acc.rx_snr_db / n,
                searches: acc.searches / n,
                aligned: acc.aligned / n,
            })
        })
        .collect()
}

/// Mean and 95% half-width of a sample.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

pub fn run_monte_carlo(cfg: &SimConfig) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let cb = cfg.build_codebook()?;
    let depth = if cfg.beam_management.wide_beam_pruning {
        cb.depth()
    } else {
        1
    };
    let setup = Setup {
        bs: cfg.array.bs()?,
        ue: cfg.array.ue()?,
        cb,
        depth,
    };
    let per_trial: Vec<Vec<TrialPoint>> = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &setup, t))
        .collect::<Result<_>>()?;

    let records = grid(cfg)
        .into_iter()
        .enumerate()
        .map(|(p, (scheme, tx, th))| {
            let column = |f: fn(&TrialPoint) -> f64| -> Vec<f64> {
                per_trial.iter().map(|t| f(&t[p])).collect()
            };
            let (avg_rx_snr_db, ci95_db) = mean_ci95(&column(|t| t.rx_snr_db));
            let (avg_searches, ci95_searches) = mean_ci95(&column(|t| t.searches));
            let (alignment_rate, _) = mean_ci95(&column(|t| t.aligned));
            MetricsRecord {
                scheme,
                tx_snr_db: tx,
                gamma_th_db: th,
                avg_rx_snr_db,
                ci95_db,
                avg_searches,
                ci95_searches,
                alignment_rate,
                n_trials: cfg.n_trials,
            }
        })
        .collect();
    Ok(summarize(records))
}

/// Stable sort by scheme name, transmit SNR, then threshold.
pub fn summarize(mut records: Vec<MetricsRecord>) -> Vec<MetricsRecord> {
    records.sort_by(|a, b| {
        a.scheme
            .as_str()
            .cmp(b.scheme.as_str())
            .then(a.tx_snr_db.total_cmp(&b.tx_snr_db))
            .then(a.gamma_th_db.total_cmp(&b.gamma_th_db))
    });
    records
}
