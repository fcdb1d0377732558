//! Horizon gain patterns and flat-region measurement.

use num_complex::Complex64;
use serde::Serialize;

use crate::array::{linear_equivalent, ArrayGeometry, WeightMatrix};
use crate::to_db;

use super::BeamSpec;

/// Fraction of the nominal sinc passband treated as the design band of a
/// flat-top beam. The outer edges belong to the roll-off.
pub const FTB_DESIGN_FRACTION: f64 = 0.8;

/// Drop below the in-band median that still counts as flat.
pub const FLAT_DROP_DB: f64 = 3.0;

const FLOOR_DB: f64 = -300.0;

/// Normalised horizon gain `|AF|² / ‖w‖²` in dB at each azimuth offset
/// (radians from broadside).
///
/// On the horizon the URA pattern equals that of the column-sum ULA, which
/// is what gets evaluated here.
pub fn horizon_gain_db(geom: &ArrayGeometry, w: &WeightMatrix, offsets: &[f64]) -> Vec<f64> {
    let w_l = linear_equivalent(w);
    let norm = w.active_count() as f64;
    let k = std::f64::consts::TAU * geom.spacing();
    offsets
        .iter()
        .map(|psi| {
            let step = Complex64::cis(-k * psi.sin());
            let mut phasor = Complex64::new(1.0, 0.0);
            let mut af = Complex64::new(0.0, 0.0);
            for x in &w_l {
                af += x * phasor;
                phasor *= step;
            }
            let g = af.norm_sqr() / norm;
            if g > 0.0 {
                to_db(g).max(FLOOR_DB)
            } else {
                FLOOR_DB
            }
        })
        .collect()
}

/// `points` azimuth offsets evenly covering `[-90°, 90°]`.
pub fn azimuth_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    let half = std::f64::consts::FRAC_PI_2;
    (0..points)
        .map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64)
        .collect()
}

/// Half-width, in horizontal direction cosine, of the band a beam is
/// designed to cover.
pub fn design_half_width(spec: &BeamSpec, geom: &ArrayGeometry) -> f64 {
    match spec.width_param {
        // nominal sinc passband is |u - u0| <= 1 / (2 a d)
        Some(a) => FTB_DESIGN_FRACTION / (2.0 * a * geom.spacing()),
        // half-power half-width of a uniform aperture
        None => 1.391_557_4 / (std::f64::consts::PI * geom.spacing() * geom.n_h() as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessReport {
    /// Peak-to-trough gain variation over the design band.
    pub ripple_db: f64,
    /// Width of the contiguous region around the centre that stays within
    /// [`FLAT_DROP_DB`] of the in-band median.
    pub flat_width_deg: f64,
    pub flat_lo_deg: f64,
    pub flat_hi_deg: f64,
    pub peak_gain_db: f64,
    pub in_band_median_db: f64,
}

pub fn flatness_report(spec: &BeamSpec, geom: &ArrayGeometry, resolution: usize) -> FlatnessReport {
    let grid = azimuth_grid(resolution);
    let gain = horizon_gain_db(geom, &spec.weights, &grid);
    let u0 = spec.center_azimuth.sin();
    let half = design_half_width(spec, geom);

    let centre = nearest_index(&grid, spec.center_azimuth);
    let mut band: Vec<f64> = grid
        .iter()
        .zip(&gain)
        .filter(|(psi, _)| (psi.sin() - u0).abs() <= half)
        .map(|(_, g)| *g)
        .collect();
    if band.is_empty() {
        band.push(gain[centre]);
    }
    let ripple_db = band.iter().cloned().fold(f64::MIN, f64::max)
        - band.iter().cloned().fold(f64::MAX, f64::min);
    band.sort_by(f64::total_cmp);
    let median = if band.len() % 2 == 1 {
        band[band.len() / 2]
    } else {
        0.5 * (band[band.len() / 2 - 1] + band[band.len() / 2])
    };

    let floor = median - FLAT_DROP_DB;
    let (mut lo, mut hi) = (centre, centre);
    while lo > 0 && gain[lo - 1] >= floor {
        lo -= 1;
    }
    while hi + 1 < grid.len() && gain[hi + 1] >= floor {
        hi += 1;
    }
    FlatnessReport {
        ripple_db,
        flat_width_deg: (grid[hi] - grid[lo]).to_degrees(),
        flat_lo_deg: grid[lo].to_degrees(),
        flat_hi_deg: grid[hi].to_degrees(),
        peak_gain_db: gain.iter().cloned().fold(f64::MIN, f64::max),
        in_band_median_db: median,
    }
}

fn nearest_index(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{array_factor, AngleDirection};
    use crate::codebook::ftb::{dft_beam, ftb_beam};

    fn spec(weights: WeightMatrix, centre_deg: f64, width: Option<f64>) -> BeamSpec {
        BeamSpec {
            level: if width.is_some() { 2 } else { 1 },
            index: 0,
            center_azimuth: centre_deg.to_radians(),
            width_param: width,
            truncation: 0.0,
            weights,
        }
    }

    #[test]
    fn horizon_gain_matches_full_array_factor() {
        let g = ArrayGeometry::ura(16, 16, 0.5).unwrap();
        let w = ftb_beam(&g, 4.0, 0.0, AngleDirection::from_azimuth_offset(-0.14)).unwrap();
        let grid = azimuth_grid(181);
        let fast = horizon_gain_db(&g, &w, &grid);
        for (psi, got) in grid.iter().zip(fast) {
            let af = array_factor(&g, w.as_slice(), AngleDirection::from_azimuth_offset(*psi)).unwrap();
            let want = to_db(af.norm_sqr() / w.active_count() as f64).max(FLOOR_DB);
            assert!((got - want).abs() < 1e-6 || want < -200.0, "{psi}: {got} vs {want}");
        }
    }

    #[test]
    fn single_element_is_flat_everywhere() {
        let g = ArrayGeometry::ura(4, 4, 0.5).unwrap();
        let w = WeightMatrix::from_fn(4, 4, |h, v| {
            if (h, v) == (1, 2) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let r = flatness_report(&spec(w, 0.0, Some(2.0)), &g, 721);
        assert!(r.ripple_db.abs() < 1e-9);
        assert!(r.peak_gain_db.abs() < 1e-9);
        assert!((r.flat_width_deg - 180.0).abs() < 1e-9);
    }

    #[test]
    fn dft_flat_width_near_half_power_beamwidth() {
        let g = ArrayGeometry::ura(16, 16, 0.5).unwrap();
        let w = dft_beam(&g, AngleDirection::broadside());
        let r = flatness_report(&spec(w, 0.0, None), &g, 3601);
        // uniform 16-element aperture: 2 asin(0.0554) = 6.35 deg half-power width
        let hpbw = 2.0 * (0.443 * 2.0 / 16.0f64).asin().to_degrees();
        assert!((r.flat_width_deg - hpbw).abs() < 0.35 * hpbw, "{r:?}");
        assert!((r.peak_gain_db - to_db(256.0)).abs() < 1e-6);
    }

    #[test]
    fn ftb_flat_over_design_band() {
        let g = ArrayGeometry::ura(16, 16, 0.5).unwrap();
        let w = ftb_beam(&g, 4.0, 0.0, AngleDirection::broadside()).unwrap();
        let r = flatness_report(&spec(w, 0.0, Some(4.0)), &g, 3601);
        assert!(r.ripple_db <= 3.0, "{r:?}");
        // regression baseline for a = 4 on 16x16
        assert!((r.ripple_db - 2.567).abs() < 0.01, "{r:?}");
        assert!(r.flat_width_deg > 20.0 && r.flat_width_deg < 30.0, "{r:?}");
    }
}
