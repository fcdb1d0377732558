//! Flat-top-beam codebooks and multi-level uplink beam management for
//! millimeter-wave hybrid beamforming.
//!
//! The crate is organised bottom-up:
//!
//! - [`array`]: planar/linear array geometry, steering vectors, array factor
//!   and the URA to ULA linear-equivalent reduction.
//! - [`codebook`]: sinc-sampled flat-top beams quantized onto a URA with
//!   phase-only (or switched-off) elements, and the L-level hierarchical
//!   codebook with parent/child coverage maps.
//! - [`channel`]: clustered multipath MIMO channel, one block per
//!   antenna-in-package (AiP), with a simple mobility model between TTIs.
//! - [`beam_mgmt`]: SNR measurements, MRC/MRT, the angle sweeping order and
//!   the beam management schemes (proposed hierarchical, exhaustive, UL only,
//!   DL-assisted UL).
//! - [`sim`]: paired-seed Monte Carlo harness.
//! - [`io`]: configuration loading and CSV/manifest emission.
//!
//! ```
//! use hbf_bm::array::{AngleDirection, ArrayGeometry};
//! use hbf_bm::codebook::{build_codebook, LevelSpec};
//!
//! let geom = ArrayGeometry::ura(16, 16, 0.5).unwrap();
//! let cb = build_codebook(&geom, &LevelSpec::default_levels()).unwrap();
//! assert_eq!(cb.total_beams(), 23);
//! let beam = cb.beam(2, 1).unwrap();
//! assert!((beam.center_azimuth.to_degrees() + 8.0).abs() < 1e-9);
//! # let _ = AngleDirection::broadside();
//! ```

pub mod array;
pub mod beam_mgmt;
pub mod channel;
pub mod codebook;
pub mod io;
pub mod sim;

mod error;

pub use error::{Error, Result};

/// Linear power ratio to decibels.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Decibels to linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
