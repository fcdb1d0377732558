//! Hierarchical beam codebook.
//!
//! Level 1 holds narrow full-aperture (DFT) beams; every higher level holds
//! progressively wider flat-top beams. Within a level, centre angles are
//! evenly spaced over the level's span (end points included) and indexed in
//! increasing order. A beam at level `ℓ + 1` covers the level-`ℓ` angles that
//! fall inside its flat region; these sets are the child maps that drive the
//! hierarchical search.
//!
//! Angles here are azimuth offsets from the array normal on the horizon, see
//! [`AngleDirection::from_azimuth_offset`].

mod ftb;
mod io;
mod pattern;

use serde::{Deserialize, Serialize};

use crate::array::{AngleDirection, ArrayGeometry, BeamVector, WeightMatrix};
use crate::{Error, Result};

pub use ftb::{dft_beam, ftb_beam, quantize_to_ura, sinc, sinc_linear_weights, steer_beam, truncate};
pub use io::{export_codebook, import_codebook, read_codebook, write_codebook};
pub use pattern::{
    azimuth_grid, design_half_width, flatness_report, horizon_gain_db, FlatnessReport,
    FLAT_DROP_DB, FTB_DESIGN_FRACTION,
};

/// Azimuth grid used to measure flat regions when building child maps
/// (0.05° steps over the horizon).
pub const COVERAGE_GRID_POINTS: usize = 3601;

/// Construction parameters of one codebook level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub count: usize,
    /// Sinc width `a`; ignored at level 1.
    #[serde(default = "default_width")]
    pub width: f64,
    /// Centre-angle span in degrees from broadside, end points included.
    pub span_deg: [f64; 2],
    /// Sinc amplitudes below this fraction of the peak are zeroed before
    /// quantization.
    #[serde(default)]
    pub truncation: f64,
}

fn default_width() -> f64 {
    1.0
}

impl LevelSpec {
    /// Three levels on a 16×16 URA: 17 narrow beams, 4 wide and 2 very wide
    /// flat-top beams.
    ///
    /// Level-1 beams sit on a 7.5° pitch across ±60°. The wider levels use a
    /// 30° and 60° pitch, placed so that the second level-2 beam points at
    /// -8° and every narrower angle is covered.
    pub fn default_levels() -> Vec<LevelSpec> {
        vec![
            LevelSpec {
                count: 17,
                width: 1.0,
                span_deg: [-60.0, 60.0],
                truncation: 0.0,
            },
            LevelSpec {
                count: 4,
                width: 3.5,
                span_deg: [-38.0, 52.0],
                truncation: 0.0,
            },
            LevelSpec {
                count: 2,
                width: 2.0,
                span_deg: [-23.0, 37.0],
                truncation: 0.0,
            },
        ]
    }

    /// Centre angles in radians.
    pub fn centers(&self) -> Vec<f64> {
        let [lo, hi] = self.span_deg;
        match self.count {
            0 => Vec::new(),
            1 => vec![(0.5 * (lo + hi)).to_radians()],
            k => (0..k)
                .map(|i| (lo + (hi - lo) * i as f64 / (k - 1) as f64).to_radians())
                .collect(),
        }
    }

    fn validate(&self, level: usize) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("count", format!("level {level} has no beams")));
        }
        let [lo, hi] = self.span_deg;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < -90.0 || hi > 90.0 {
            return Err(Error::invalid(
                "span_deg",
                format!("level {level}: span [{lo}, {hi}] must be ordered within [-90, 90]"),
            ));
        }
        if self.count > 1 && lo == hi {
            return Err(Error::invalid(
                "span_deg",
                format!("level {level}: {} beams need a non-empty span", self.count),
            ));
        }
        if level > 1 && !(self.width > 0.0) {
            return Err(Error::invalid("width", format!("level {level}: must be > 0")));
        }
        if !(0.0..1.0).contains(&self.truncation) {
            return Err(Error::invalid("truncation", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpec {
    /// 1-based level, 1 = narrowest.
    pub level: usize,
    /// 0-based position in the level's ascending angle set.
    pub index: usize,
    /// Radians from broadside.
    pub center_azimuth: f64,
    /// Sinc width; `None` for level-1 DFT beams.
    pub width_param: Option<f64>,
    pub truncation: f64,
    pub weights: WeightMatrix,
}

impl BeamSpec {
    pub fn direction(&self) -> AngleDirection {
        AngleDirection::from_azimuth_offset(self.center_azimuth)
    }

    pub fn beam_vector(&self) -> BeamVector {
        self.weights.vectorize()
    }

    pub fn is_dft(&self) -> bool {
        self.width_param.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookLevel {
    pub spec: LevelSpec,
    pub beams: Vec<BeamSpec>,
    /// For levels above the first: per beam, the ascending indices of the
    /// level-below angles inside its flat region. Empty at level 1.
    pub children: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalCodebook {
    geometry: ArrayGeometry,
    levels: Vec<CodebookLevel>,
}

impl HierarchicalCodebook {
    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    /// Number of levels `L`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// 1-based.
    pub fn level(&self, level: usize) -> &CodebookLevel {
        &self.levels[level - 1]
    }

    pub fn levels(&self) -> &[CodebookLevel] {
        &self.levels
    }

    /// `K_ℓ`.
    pub fn level_size(&self, level: usize) -> usize {
        self.levels[level - 1].beams.len()
    }

    /// Codebook cardinality `Σ K_ℓ`.
    pub fn total_beams(&self) -> usize {
        self.levels.iter().map(|l| l.beams.len()).sum()
    }

    pub fn beam(&self, level: usize, index: usize) -> Option<&BeamSpec> {
        self.levels.get(level.checked_sub(1)?)?.beams.get(index)
    }

    pub fn beams(&self) -> impl Iterator<Item = &BeamSpec> {
        self.levels.iter().flat_map(|l| l.beams.iter())
    }

    /// Level-(`level` - 1) angles covered by beam `index` of `level`.
    pub fn children(&self, level: usize, index: usize) -> &[usize] {
        &self.levels[level - 1].children[index]
    }

    /// Beams of `level + 1` covering angle `index` of `level`.
    pub fn parents(&self, level: usize, index: usize) -> Vec<usize> {
        match self.levels.get(level) {
            Some(upper) => upper
                .children
                .iter()
                .enumerate()
                .filter(|(_, c)| c.contains(&index))
                .map(|(k, _)| k)
                .collect(),
            None => Vec::new(),
        }
    }

    /// The covering parent whose centre is closest to the child's centre.
    pub fn parent(&self, level: usize, index: usize) -> Option<usize> {
        let child = self.beam(level, index)?.center_azimuth;
        self.parents(level, index).into_iter().min_by(|&a, &b| {
            let da = (self.levels[level].beams[a].center_azimuth - child).abs();
            let db = (self.levels[level].beams[b].center_azimuth - child).abs();
            da.total_cmp(&db)
        })
    }

    /// Chain of ancestors of a level-1 angle: entry `ℓ - 1` is the level-`ℓ`
    /// index (entry 0 is the angle itself).
    pub fn ancestry(&self, index: usize) -> Vec<usize> {
        let mut chain = vec![index];
        for level in 1..self.depth() {
            let below = *chain.last().unwrap();
            let up = self
                .parent(level, below)
                .expect("coverage invariant checked at build time");
            chain.push(up);
        }
        chain
    }

    /// Assemble from parts, checking every structural invariant.
    pub fn from_levels(geometry: ArrayGeometry, levels: Vec<CodebookLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Codebook("at least one level is required".into()));
        }
        for (li, level) in levels.iter().enumerate() {
            let ell = li + 1;
            if level.beams.is_empty() {
                return Err(Error::Codebook(format!("level {ell} is empty")));
            }
            for (k, b) in level.beams.iter().enumerate() {
                if b.level != ell || b.index != k {
                    return Err(Error::Codebook(format!(
                        "beam labelled ({}, {}) stored at ({ell}, {k})",
                        b.level, b.index
                    )));
                }
                if !b.weights.matches(&geometry) {
                    return Err(Error::Codebook(format!("beam ({ell}, {k}) has wrong dimensions")));
                }
                if (ell == 1) != b.is_dft() {
                    return Err(Error::Codebook(format!(
                        "beam ({ell}, {k}): level 1 must be DFT beams and only level 1"
                    )));
                }
            }
            if level
                .beams
                .windows(2)
                .any(|w| w[0].center_azimuth >= w[1].center_azimuth)
            {
                return Err(Error::Codebook(format!(
                    "level {ell} angles are not strictly increasing"
                )));
            }
            if ell == 1 {
                if !level.children.is_empty() {
                    return Err(Error::Codebook("level 1 cannot have children".into()));
                }
                continue;
            }
            if level.children.len() != level.beams.len() {
                return Err(Error::Codebook(format!("level {ell} child map size mismatch")));
            }
            let below = levels[li - 1].beams.len();
            let mut covered = vec![false; below];
            for set in &level.children {
                if set.windows(2).any(|w| w[0] >= w[1]) || set.iter().any(|&c| c >= below) {
                    return Err(Error::Codebook(format!("level {ell} has a malformed child set")));
                }
                for &c in set {
                    covered[c] = true;
                }
            }
            if let Some(orphan) = covered.iter().position(|c| !c) {
                return Err(Error::Codebook(format!(
                    "level-{} angle {orphan} ({:.2}°) is covered by no level-{ell} beam",
                    ell - 1,
                    levels[li - 1].beams[orphan].center_azimuth.to_degrees()
                )));
            }
        }
        Ok(Self { geometry, levels })
    }
}

/// Synthesize every beam and derive the child maps from measured flat
/// regions.
pub fn build_codebook(geom: &ArrayGeometry, level_specs: &[LevelSpec]) -> Result<HierarchicalCodebook> {
    let mut levels: Vec<CodebookLevel> = Vec::with_capacity(level_specs.len());
    for (li, spec) in level_specs.iter().enumerate() {
        let ell = li + 1;
        spec.validate(ell)?;
        let mut beams = Vec::with_capacity(spec.count);
        for (k, psi) in spec.centers().into_iter().enumerate() {
            let dir = AngleDirection::from_azimuth_offset(psi);
            let (weights, width_param) = if ell == 1 {
                (dft_beam(geom, dir), None)
            } else {
                (ftb_beam(geom, spec.width, spec.truncation, dir)?, Some(spec.width))
            };
            beams.push(BeamSpec {
                level: ell,
                index: k,
                center_azimuth: psi,
                width_param,
                truncation: if ell == 1 { 0.0 } else { spec.truncation },
                weights,
            });
        }
        let children = match levels.last() {
            None => Vec::new(),
            Some(below) => beams
                .iter()
                .map(|b| {
                    let r = flatness_report(b, geom, COVERAGE_GRID_POINTS);
                    below
                        .beams
                        .iter()
                        .filter(|c| {
                            let deg = c.center_azimuth.to_degrees();
                            deg >= r.flat_lo_deg && deg <= r.flat_hi_deg
                        })
                        .map(|c| c.index)
                        .collect()
                })
                .collect(),
        };
        levels.push(CodebookLevel {
            spec: spec.clone(),
            beams,
            children,
        });
    }
    HierarchicalCodebook::from_levels(*geom, levels)
}
