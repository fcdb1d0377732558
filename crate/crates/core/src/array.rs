//! Array geometry, steering vectors and array factor.
//!
//! A URA lies in the yz-plane: horizontal index `h` runs along y and vertical
//! index `v` along z. A ULA lies on the y-axis. The phase of element `(h, v)`
//! towards direction `(θ, φ)` is
//!
//! ```text
//! 2π (d/λ) (v cos θ + h sin θ cos φ)
//! ```
//!
//! and the steering vector uses `exp(+j phase)`. The array factor of weights
//! `w` is evaluated as `a(θ, φ)^H w`, so a beam whose weights equal the
//! steering vector of some direction peaks coherently there.
//!
//! Weights and steering vectors share one flattening: the grid is stored with
//! vertical index fastest, i.e. `index = h * n_v + v`. Seen as a matrix with
//! one row per vertical index and one column per horizontal index this is
//! plain column stacking (`vec`).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for the unit-modulus check on active weights.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Ura,
    Ula,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    kind: ArrayKind,
    n_h: usize,
    n_v: usize,
    /// Element spacing in wavelengths.
    spacing: f64,
}

impl ArrayGeometry {
    pub fn ura(n_h: usize, n_v: usize, spacing: f64) -> Result<Self> {
        if n_v == 1 {
            return Err(Error::Geometry(
                "a URA needs n_v > 1; use ArrayGeometry::ula".into(),
            ));
        }
        Self::checked(ArrayKind::Ura, n_h, n_v, spacing)
    }

    pub fn ula(n: usize, spacing: f64) -> Result<Self> {
        Self::checked(ArrayKind::Ula, n, 1, spacing)
    }

    fn checked(kind: ArrayKind, n_h: usize, n_v: usize, spacing: f64) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::Geometry(format!(
                "element counts must be positive (n_h={n_h}, n_v={n_v})"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Geometry(format!("spacing must be > 0, got {spacing}")));
        }
        Ok(Self {
            kind,
            n_h,
            n_v,
            spacing,
        })
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A panel of `count` copies of this array tiled side by side along the
    /// horizontal axis.
    pub fn tiled(&self, count: usize) -> Result<Self> {
        Self::checked(self.kind, self.n_h * count, self.n_v, self.spacing)
    }

    /// Per-element phase increments `(horizontal, vertical)` towards `dir`.
    pub(crate) fn wavenumbers(&self, dir: AngleDirection) -> (f64, f64) {
        let k = TAU * self.spacing;
        let kh = k * dir.theta.sin() * dir.phi.cos();
        let kv = if self.kind == ArrayKind::Ula {
            0.0
        } else {
            k * dir.theta.cos()
        };
        (kh, kv)
    }

    pub fn steering_vector(&self, dir: AngleDirection) -> Vec<Complex64> {
        self.steering_vector_offset(dir, 0)
    }

    /// Steering vector of this array when its first column sits `h_offset`
    /// elements along the horizontal axis of a larger co-planar panel.
    pub(crate) fn steering_vector_offset(
        &self,
        dir: AngleDirection,
        h_offset: usize,
    ) -> Vec<Complex64> {
        let (kh, kv) = self.wavenumbers(dir);
        let mut out = Vec::with_capacity(self.len());
        for h in 0..self.n_h {
            let ph = (h + h_offset) as f64 * kh;
            for v in 0..self.n_v {
                out.push(Complex64::cis(ph + v as f64 * kv));
            }
        }
        out
    }
}

/// Inclination `theta ∈ [0, π]` and azimuth `phi ∈ [-π, π]`, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDirection {
    pub theta: f64,
    pub phi: f64,
}

impl AngleDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid("theta", format!("{theta} outside [0, π]")));
        }
        if !(-PI..=PI).contains(&phi) {
            return Err(Error::invalid("phi", format!("{phi} outside [-π, π]")));
        }
        Ok(Self { theta, phi })
    }

    /// Any `(theta, phi)` folded back into the canonical ranges.
    pub fn normalized(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(TAU);
        let mut phi = phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        Self {
            theta,
            phi: wrap_pi(phi),
        }
    }

    /// Horizon, array normal: every steering phase is zero.
    pub fn broadside() -> Self {
        Self {
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
        }
    }

    /// Horizon direction at azimuth `offset` radians from the array normal,
    /// positive towards the +y end of the array.
    ///
    /// Codebook centre angles and channel cluster ranges are expressed this
    /// way; internally the direction is `(π/2, π/2 - offset)`.
    pub fn from_azimuth_offset(offset: f64) -> Self {
        Self::normalized(FRAC_PI_2, FRAC_PI_2 - offset)
    }

    /// Azimuth measured from the array normal, in `[-π, π]`.
    pub fn azimuth_offset(&self) -> f64 {
        wrap_pi(FRAC_PI_2 - self.phi)
    }

    /// Horizontal direction cosine `sin θ cos φ`.
    pub fn horizontal_cosine(&self) -> f64 {
        self.theta.sin() * self.phi.cos()
    }
}

pub(crate) fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid maps +π to -π; keep the sign of the input at the boundary
    if y == -PI && x > 0.0 {
        PI
    } else {
        y
    }
}

/// Analog weights of one AiP: each entry is either exactly zero (element
/// off) or unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n_h: usize,
    n_v: usize,
    entries: Vec<Complex64>,
}

impl WeightMatrix {
    /// `entries` in flattened order (`h * n_v + v`).
    pub fn new(n_h: usize, n_v: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n_h * n_v {
            return Err(Error::DimensionMismatch {
                expected: n_h * n_v,
                got: entries.len(),
            });
        }
        let mut active = 0;
        for (i, e) in entries.iter().enumerate() {
            if *e == Complex64::new(0.0, 0.0) {
                continue;
            }
            if (e.norm() - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(Error::Weights(format!(
                    "entry {i} has modulus {} (must be 0 or 1)",
                    e.norm()
                )));
            }
            active += 1;
        }
        if active == 0 {
            return Err(Error::Weights("all elements are switched off".into()));
        }
        Ok(Self { n_h, n_v, entries })
    }

    pub fn from_fn(
        n_h: usize,
        n_v: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(n_h * n_v);
        for h in 0..n_h {
            for v in 0..n_v {
                entries.push(f(h, v));
            }
        }
        Self::new(n_h, n_v, entries)
    }

    /// Build from a printed matrix: one row per vertical index, one column
    /// per horizontal index.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_v = rows.len();
        let n_h = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_h) {
            return Err(Error::DimensionMismatch {
                expected: n_h,
                got: bad.len(),
            });
        }
        Self::from_fn(n_h, n_v, |h, v| rows[v][h])
    }

    /// Inverse of [`WeightMatrix::from_rows`].
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.n_v)
            .map(|v| (0..self.n_h).map(|h| self.get(h, v)).collect())
            .collect()
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn get(&self, h: usize, v: usize) -> Complex64 {
        self.entries[h * self.n_v + v]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn active_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| **e != Complex64::new(0.0, 0.0))
            .count()
    }

    pub fn vectorize(&self) -> BeamVector {
        vectorize(self)
    }

    pub fn matches(&self, geom: &ArrayGeometry) -> bool {
        self.n_h == geom.n_h() && self.n_v == geom.n_v()
    }
}

/// Flattened analog beam `u_i` of one AiP.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector(Vec<Complex64>);

impl BeamVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖u‖²`, which equals the number of active elements.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }

    /// Reshape back into a weight grid.
    pub fn reshape(&self, n_h: usize, n_v: usize) -> Result<WeightMatrix> {
        WeightMatrix::new(n_h, n_v, self.0.clone())
    }
}

impl From<WeightMatrix> for BeamVector {
    fn from(w: WeightMatrix) -> Self {
        BeamVector(w.entries)
    }
}

pub fn steering_vector(geom: &ArrayGeometry, dir: AngleDirection) -> Vec<Complex64> {
    geom.steering_vector(dir)
}

/// `a(dir)^H w` for arbitrary complex weights in flattened order.
pub fn array_factor(
    geom: &ArrayGeometry,
    weights: &[Complex64],
    dir: AngleDirection,
) -> Result<Complex64> {
    if weights.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            got: weights.len(),
        });
    }
    let (kh, kv) = geom.wavenumbers(dir);
    let n_v = geom.n_v();
    let mut acc = Complex64::new(0.0, 0.0);
    for (h, column) in weights.chunks_exact(n_v).enumerate() {
        let ph = h as f64 * kh;
        for (v, w) in column.iter().enumerate() {
            if *w != Complex64::new(0.0, 0.0) {
                acc += w * Complex64::cis(-(ph + v as f64 * kv));
            }
        }
    }
    Ok(acc)
}

/// Per-column sums `Σ_v w[h, v]`: the ULA weights whose horizon pattern
/// equals the URA pattern.
pub fn linear_equivalent(w: &WeightMatrix) -> Vec<Complex64> {
    w.entries
        .chunks_exact(w.n_v)
        .map(|column| column.iter().sum())
        .collect()
}

pub fn vectorize(w: &WeightMatrix) -> BeamVector {
    BeamVector(w.entries.clone())
}
