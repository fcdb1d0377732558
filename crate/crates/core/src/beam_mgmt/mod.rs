//! Uplink beam management over a hierarchical codebook.
//!
//! Every AiP of the base station picks one analog combiner per control time
//! slot (CTS); all AiPs are measured in parallel, so one CTS is one beam
//! search. Four schemes are provided:
//!
//! - [`Scheme::Proposed`]: four UL CTSs over the narrow beams next to the
//!   previous choice, then a DL phase that walks the remaining narrow beams
//!   grouped by the wide beams covering them.
//! - [`Scheme::DlAssisted`]: same UL phase, then the remaining narrow beams
//!   in plain sweep order.
//! - [`Scheme::OnlyUl`]: the UL phase alone.
//! - [`Scheme::Exhaustive`]: every narrow beam, best joint configuration.
//!
//! Angle indices are 0-based throughout this module except in
//! [`sweep_sequence`], which keeps the 1-based convention of its textbook
//! form.

mod protocol;
mod snr;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codebook::HierarchicalCodebook;
use crate::{from_db, Error, Result};

pub use protocol::{
    dl_assisted_ul, exhaustive_search, initialize, initialize_with, only_ul, run_scheme, run_tti,
    BmOptions, UL_CTS,
};
pub use snr::{measure_snr, mrc_init_snr, mrt_precoder, BeamResponses};
pub use sweep::{seeded_order, sweep_order, sweep_sequence};

/// Transmit power, noise variance and SNR threshold, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power: f64,
    pub noise_var: f64,
    pub snr_threshold: f64,
}

impl LinkBudget {
    pub fn new(tx_power: f64, noise_var: f64, snr_threshold: f64) -> Result<Self> {
        if !(tx_power > 0.0 && tx_power.is_finite()) {
            return Err(Error::invalid("tx_power", "must be > 0"));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::invalid("noise_var", "must be > 0"));
        }
        if !(snr_threshold >= 0.0) {
            return Err(Error::invalid("snr_threshold", "must be >= 0"));
        }
        Ok(Self {
            tx_power,
            noise_var,
            snr_threshold,
        })
    }

    /// Unit noise, transmit SNR and threshold given in dB.
    pub fn from_db(tx_snr_db: f64, gamma_th_db: f64) -> Result<Self> {
        Self::new(from_db(tx_snr_db), 1.0, from_db(gamma_th_db))
    }

    /// `P / σ²`.
    pub fn snr(&self) -> f64 {
        self.tx_power / self.noise_var
    }

    pub fn with_threshold(self, snr_threshold: f64) -> Self {
        Self {
            snr_threshold,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Proposed,
    Exhaustive,
    OnlyUl,
    DlAssisted,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::Exhaustive,
        Scheme::OnlyUl,
        Scheme::DlAssisted,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Exhaustive => "exhaustive",
            Scheme::OnlyUl => "only_ul",
            Scheme::DlAssisted => "dl_assisted",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::invalid("schemes", format!("unknown scheme `{s}`")))
    }
}

/// What the base station carries from one TTI to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct BmState {
    /// Level-1 angle index in use at each AiP.
    pub nu: Vec<usize>,
    /// UE precoder of the latest data phase.
    pub v_mrt: Vec<Complex64>,
    /// Measurements of the current TTI, keyed by `(aip, level, index)`.
    pub snr_cache: BTreeMap<(usize, usize, usize), f64>,
    /// CTSs consumed in the current TTI.
    pub cts_counter: usize,
    pub aligned: bool,
}

impl BmState {
    /// A state that has never been aligned.
    pub fn new(nu: Vec<usize>, v_mrt: Vec<Complex64>) -> Self {
        Self {
            nu,
            v_mrt,
            snr_cache: BTreeMap::new(),
            cts_counter: 0,
            aligned: false,
        }
    }

    /// Index at every level of the beams covering AiP `aip`'s current
    /// narrow beam; entry `l - 1` is the level-`l` index.
    pub fn level_indices(&self, cb: &HierarchicalCodebook, aip: usize) -> Vec<usize> {
        cb.ancestry(self.nu[aip])
    }

    fn begin_tti(&mut self) {
        self.snr_cache.clear();
        self.cts_counter = 0;
    }

    fn record(&mut self, aip: usize, level: usize, index: usize, snr: f64) {
        self.snr_cache.insert((aip, level, index), snr);
    }

    /// Per-AiP level-1 argmax over this TTI's cache.
    fn best_cached(&self, n_aips: usize) -> Vec<(usize, f64)> {
        (0..n_aips)
            .map(|aip| {
                self.snr_cache
                    .range((aip, 1, 0)..(aip, 2, 0))
                    .fold((self.nu[aip], f64::NEG_INFINITY), |best, (&(_, _, k), &g)| {
                        if g > best.1 {
                            (k, g)
                        } else {
                            best
                        }
                    })
            })
            .collect()
    }
}

/// Outcome of one TTI of beam management.
#[derive(Debug, Clone, PartialEq)]
pub struct TtiResult {
    /// `None` for the initialization sweep, which belongs to no scheme.
    pub scheme: Option<Scheme>,
    pub aligned: bool,
    /// Level-1 index chosen at each AiP.
    pub beams: Vec<usize>,
    /// CTSs spent measuring.
    pub searches: usize,
    /// `Σ_i γ_i` of the chosen configuration (linear).
    pub achieved_snr: f64,
}
