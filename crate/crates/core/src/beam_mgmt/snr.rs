//! Received-SNR measurements and the MRT precoder.

use nalgebra::{DMatrix, DMatrixView, SymmetricEigen};
use num_complex::Complex64;

use crate::array::BeamVector;
use crate::channel::{hermitian_times, ChannelRealization};
use crate::codebook::HierarchicalCodebook;
use crate::{Error, Result};

use super::LinkBudget;

fn checked_norm_sqr(u: &BeamVector) -> Result<f64> {
    let n = u.norm_sqr();
    if n == 0.0 {
        return Err(Error::Precondition("combiner has no active element".into()));
    }
    Ok(n)
}

fn check_rows(u: &BeamVector, h_i: &DMatrixView<'_, Complex64>) -> Result<()> {
    if u.len() != h_i.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h_i.nrows(),
            got: u.len(),
        });
    }
    Ok(())
}

/// `P |u^H H_i v|² / (σ² ‖u‖²)` for a unit-norm UE precoder `v`.
pub fn measure_snr(
    u: &BeamVector,
    h_i: &DMatrixView<'_, Complex64>,
    v: &[Complex64],
    budget: &LinkBudget,
) -> Result<f64> {
    check_rows(u, h_i)?;
    if v.len() != h_i.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h_i.ncols(),
            got: v.len(),
        });
    }
    let norm = checked_norm_sqr(u)?;
    let y = hermitian_times(h_i, u.as_slice());
    let inner: Complex64 = y.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    Ok(budget.snr() * inner.norm_sqr() / norm)
}

/// Sum over UE antennas of the per-branch SNR of the beamformed pilot,
/// `P ‖H_i^H u‖² / (σ² ‖u‖²)`.
pub fn mrc_init_snr(
    u: &BeamVector,
    h_i: &DMatrixView<'_, Complex64>,
    budget: &LinkBudget,
) -> Result<f64> {
    check_rows(u, h_i)?;
    let norm = checked_norm_sqr(u)?;
    let y = hermitian_times(h_i, u.as_slice());
    Ok(budget.snr() * y.iter().map(Complex64::norm_sqr).sum::<f64>() / norm)
}

/// Dominant left singular vector of the `N_ue × M_bs` beamformed channel,
/// unit norm, with its first non-negligible entry made real and positive.
pub fn mrt_precoder(effective: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if effective.iter().all(|x| *x == Complex64::new(0.0, 0.0)) || effective.is_empty() {
        return Err(Error::Precondition("effective channel is zero".into()));
    }
    let svd = effective.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let best = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut v: Vec<Complex64> = u.column(best).iter().copied().collect();
    normalize_phase(&mut v);
    Ok(v)
}

fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let pivot = v.iter().find(|x| x.norm() > 1e-9 * peak).copied();
    if let Some(p) = pivot {
        let rot = p.conj() / (p.norm() * norm);
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Largest eigenvalue of a small Hermitian matrix.
fn max_eigenvalue(g: &DMatrix<Complex64>) -> f64 {
    match g.nrows() {
        0 => 0.0,
        1 => g[(0, 0)].re,
        2 => {
            let (a, d) = (g[(0, 0)].re, g[(1, 1)].re);
            let half = 0.5 * (a - d);
            0.5 * (a + d) + (half * half + g[(0, 1)].norm_sqr()).sqrt()
        }
        _ => SymmetricEigen::new(g.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max),
    }
}

/// Responses `H_i^H u / ‖u‖` of every codebook beam at every AiP, computed
/// once per channel realization so that each measurement is a short inner
/// product.
#[derive(Debug, Clone)]
pub struct BeamResponses {
    n_ue: usize,
    n_aips: usize,
    sizes: Vec<usize>,
    /// Per level, indexed `((aip * K_l) + k) * n_ue + c`.
    levels: Vec<Vec<Complex64>>,
}

impl BeamResponses {
    /// All levels.
    pub fn new(cb: &HierarchicalCodebook, ch: &ChannelRealization) -> Self {
        Self::with_depth(cb, ch, cb.depth())
    }

    /// Only the first `depth` levels (the narrow ones are all most schemes
    /// measure).
    pub fn with_depth(cb: &HierarchicalCodebook, ch: &ChannelRealization, depth: usize) -> Self {
        let n_ue = ch.ue().len();
        let n_aips = ch.n_aips();
        let mut levels = Vec::with_capacity(depth);
        let mut sizes = Vec::with_capacity(depth);
        for level in cb.levels().iter().take(depth) {
            let k_l = level.beams.len();
            let mut table = Vec::with_capacity(n_aips * k_l * n_ue);
            for aip in 0..n_aips {
                let block = ch.block(aip);
                for beam in &level.beams {
                    let scale = 1.0 / (beam.weights.active_count() as f64).sqrt();
                    table.extend(
                        hermitian_times(&block, beam.weights.as_slice())
                            .into_iter()
                            .map(|y| y * scale),
                    );
                }
            }
            levels.push(table);
            sizes.push(k_l);
        }
        Self {
            n_ue,
            n_aips,
            sizes,
            levels,
        }
    }

    pub fn n_aips(&self) -> usize {
        self.n_aips
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `K_l`.
    pub fn level_size(&self, level: usize) -> usize {
        self.sizes[level - 1]
    }

    /// Normalized response of beam `k` (0-based) of `level` at AiP `aip`.
    pub fn response(&self, level: usize, aip: usize, k: usize) -> &[Complex64] {
        let start = (aip * self.sizes[level - 1] + k) * self.n_ue;
        &self.levels[level - 1][start..start + self.n_ue]
    }

    /// Eq.-style measurement with precoder `v`.
    pub fn snr(&self, budget: &LinkBudget, level: usize, aip: usize, k: usize, v: &[Complex64]) -> f64 {
        let inner: Complex64 = self
            .response(level, aip, k)
            .iter()
            .zip(v)
            .map(|(a, b)| a.conj() * b)
            .sum();
        budget.snr() * inner.norm_sqr()
    }

    /// MRC measurement used during initialization.
    pub fn mrc_snr(&self, budget: &LinkBudget, level: usize, aip: usize, k: usize) -> f64 {
        budget.snr()
            * self
                .response(level, aip, k)
                .iter()
                .map(Complex64::norm_sqr)
                .sum::<f64>()
    }

    /// Column-normalized beamformed channel of a level-1 selection.
    pub fn effective(&self, selection: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n_ue, selection.len(), |c, i| {
            self.response(1, i, selection[i])[c]
        })
    }

    /// `Σ_i γ_i` of a level-1 selection with the UE precoder re-optimized by
    /// MRT: `(P/σ²) σ_max²` of the normalized beamformed channel.
    pub fn mrt_sum_snr(&self, budget: &LinkBudget, selection: &[usize]) -> f64 {
        let m = selection.len();
        let mut gram = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
        for i in 0..m {
            let yi = self.response(1, i, selection[i]);
            for j in i..m {
                let yj = self.response(1, j, selection[j]);
                let g: Complex64 = yi.iter().zip(yj).map(|(a, b)| a.conj() * b).sum();
                gram[(i, j)] = g;
                gram[(j, i)] = g.conj();
            }
        }
        budget.snr() * max_eigenvalue(&gram)
    }

    /// MRT precoder for a level-1 selection.
    pub fn mrt(&self, selection: &[usize]) -> Vec<Complex64> {
        mrt_precoder(&self.effective(selection)).unwrap_or_else(|_| {
            let mut v = vec![Complex64::new(0.0, 0.0); self.n_ue];
            v[0] = Complex64::new(1.0, 0.0);
            v
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{AngleDirection, ArrayGeometry, WeightMatrix};
    use crate::codebook::dft_beam;

    fn budget() -> LinkBudget {
        LinkBudget::new(2.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn single_element_all_ones() {
        let h = DMatrix::from_element(4, 2, Complex64::new(1.0, 0.0));
        let u = WeightMatrix::from_fn(2, 2, |h, v| {
            Complex64::new(if (h, v) == (0, 0) { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap()
        .vectorize();
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let g = measure_snr(&u, &h.rows(0, 4), &v, &budget()).unwrap();
        assert!((g - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_closed_form() {
        let geom = ArrayGeometry::ura(4, 4, 0.5).unwrap();
        let dir = AngleDirection::from_azimuth_offset(0.3);
        let a = geom.steering_vector(dir);
        let b = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let gain = Complex64::new(0.3, -0.4);
        let h = DMatrix::from_fn(16, 2, |r, c| gain * a[r] * b[c].conj());
        let u = dft_beam(&geom, dir).vectorize();
        let got = measure_snr(&u, &h.rows(0, 16), &b, &budget()).unwrap();
        assert!((got - 4.0 * 0.25 * 16.0).abs() < 1e-9, "{got}");
        // a global phase on u or v changes nothing
        let v2: Vec<_> = b.iter().map(|x| x * Complex64::cis(1.1)).collect();
        let again = measure_snr(&u, &h.rows(0, 16), &v2, &budget()).unwrap();
        assert!((got - again).abs() < 1e-9);
        assert!(mrc_init_snr(&u, &h.rows(0, 16), &budget()).unwrap() >= got - 1e-9);
    }

    #[test]
    fn mrt_matches_column_for_one_aip() {
        let eff = DMatrix::from_vec(3, 1, vec![
            Complex64::new(0.0, 2.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ]);
        let v = mrt_precoder(&eff).unwrap();
        let n = eff.norm();
        let rot = Complex64::new(0.0, -1.0);
        for (x, e) in v.iter().zip(eff.iter()) {
            assert!((x - e * rot / n).norm() < 1e-12);
        }
        assert!(v[0].im.abs() < 1e-15 && v[0].re > 0.0);
        assert!(mrt_precoder(&DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0))).is_err());
    }

    #[test]
    fn max_eigenvalue_agrees_with_general_solver() {
        let g = DMatrix::from_vec(2, 2, vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, -2.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(1.0, 0.0),
        ]);
        let general = SymmetricEigen::new(g.clone()).eigenvalues.max();
        assert!((max_eigenvalue(&g) - general).abs() < 1e-12);
    }
}
