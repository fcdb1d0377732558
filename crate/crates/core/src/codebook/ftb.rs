//! Flat-top beam synthesis.
//!
//! A flat-top azimuth pattern on a ULA needs amplitude-tapered sinc weights.
//! A URA can emulate those amplitudes with phase-only elements: the horizon
//! pattern of a URA only depends on its column sums, so each column switches
//! on as many `±1` elements as the target amplitude requires. The resulting
//! real-valued grid is then steered by an element-wise phase ramp.

use num_complex::Complex64;

use crate::array::{ArrayGeometry, AngleDirection, WeightMatrix};
use crate::{Error, Result};

/// Slack allowed when comparing a target amplitude against an integer element
/// count, so that values like `16.000000000000004` do not cost an element.
const COUNT_SLACK: f64 = 1e-9;

/// `sin(πx) / (πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Target linear-equivalent amplitudes `n_h · sinc((h - c) / a)` where the
/// centre `c` is `(n_v - 1) / 2` for even `n_v` and `n_v / 2` for odd `n_v`.
pub fn sinc_linear_weights(n_h: usize, n_v: usize, a: f64) -> Result<Vec<f64>> {
    if !(a > 0.0) || a.is_nan() {
        return Err(Error::invalid("width", format!("sinc width must be > 0, got {a}")));
    }
    let centre = if n_v.is_multiple_of(2) {
        0.5 * (n_v as f64 - 1.0)
    } else {
        0.5 * n_v as f64
    };
    Ok((0..n_h)
        .map(|h| n_h as f64 * sinc((h as f64 - centre) / a))
        .collect())
}

/// Zero every amplitude below `fraction` of the largest one.
pub fn truncate(w_l: &[f64], fraction: f64) -> Vec<f64> {
    let peak = w_l.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    w_l.iter()
        .map(|&x| if x.abs() < fraction * peak { 0.0 } else { x })
        .collect()
}

/// Row order used when switching elements on in a column: start at
/// `n_v / 2`, then grow one below, one above, and so on.
fn fill_order(n_v: usize) -> impl Iterator<Item = usize> {
    let centre = (n_v / 2) as isize;
    (0..2 * n_v as isize)
        .map(move |k| if k % 2 == 0 { centre - k / 2 } else { centre + k / 2 + 1 })
        .filter(move |&r| r >= 0 && (r as usize) < n_v)
        .map(|r| r as usize)
}

/// Quantize target column sums onto an `n_h × n_v` grid of `{0, ±1}`.
///
/// Column `h` gets `⌈|w_l[h]|⌉` contiguous, vertically centred elements with
/// the sign of `w_l[h]`, so its sum brackets the target from above in
/// magnitude.
pub fn quantize_to_ura(w_l: &[f64], n_v: usize) -> Result<WeightMatrix> {
    if n_v == 0 {
        return Err(Error::Precondition("n_v must be positive".into()));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); w_l.len() * n_v];
    for (h, &target) in w_l.iter().enumerate() {
        if !target.is_finite() || target.abs() > n_v as f64 + COUNT_SLACK {
            return Err(Error::Precondition(format!(
                "column {h}: |{target}| exceeds the {n_v} elements available"
            )));
        }
        let count = ((target.abs() - COUNT_SLACK).ceil().max(0.0) as usize).min(n_v);
        let value = Complex64::new(target.signum(), 0.0);
        for row in fill_order(n_v).take(count) {
            entries[h * n_v + row] = value;
        }
    }
    WeightMatrix::new(w_l.len(), n_v, entries)
}

/// Multiply every element by its steering phase towards `target`.
pub fn steer_beam(
    w: &WeightMatrix,
    geom: &ArrayGeometry,
    target: AngleDirection,
) -> Result<WeightMatrix> {
    if !w.matches(geom) {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            got: w.n_h() * w.n_v(),
        });
    }
    let steering = geom.steering_vector(target);
    let entries = w
        .as_slice()
        .iter()
        .zip(&steering)
        .map(|(e, s)| e * s)
        .collect();
    WeightMatrix::new(w.n_h(), w.n_v(), entries)
}

/// Full-aperture beam: every element on, phases matched to `target`.
pub fn dft_beam(geom: &ArrayGeometry, target: AngleDirection) -> WeightMatrix {
    WeightMatrix::new(geom.n_h(), geom.n_v(), geom.steering_vector(target))
        .expect("steering vectors are unit modulus")
}

/// Sinc-sampled, quantized and steered flat-top beam.
pub fn ftb_beam(
    geom: &ArrayGeometry,
    width: f64,
    truncation: f64,
    target: AngleDirection,
) -> Result<WeightMatrix> {
    let w_l = sinc_linear_weights(geom.n_h(), geom.n_v(), width)?;
    let w_l = truncate(&w_l, truncation);
    let base = quantize_to_ura(&w_l, geom.n_v())?;
    steer_beam(&base, geom, target)
}
