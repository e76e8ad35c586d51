//! Sampling on `αℤ` in the shift-invariant space `V²(g)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipliers::multiplier_table;
use crate::orbit::m0_nonvanishing;
use crate::window::{fourier_profile, RationalWindow};

const MARGIN_GRID: usize = 1024;
const AMALGAM_CELLS: i64 = 1000;
const AMALGAM_SAMPLES: usize = 64;

fn min_abs_re(g: &RationalWindow) -> f64 {
    g.w().iter().map(|w| w.re.abs()).fold(f64::INFINITY, f64::min)
}

/// `min_ξ Σ_k |ĝ(ξ − k)|²` over a grid of `[0, 1)`.
///
/// The truncated sum is itself a lower bound for the full sum.
pub fn stability_margin(g: &RationalWindow) -> f64 {
    let rate = crate::TWO_PI * min_abs_re(g);
    let k_max = ((40.0 / rate).ceil() as i64 + 2).min(10_000);
    (0..MARGIN_GRID)
        .map(|i| {
            let xi = (i as f64 + 0.5) / MARGIN_GRID as f64;
            (-k_max..=k_max)
                .map(|k| fourier_profile(g, xi - k as f64).map(|v| v.norm_sqr()).unwrap_or(0.0))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Upper bound of `‖g‖_{W₀} = Σ_k max_{[k,k+1]} |g|` for zero-sum windows.
pub fn amalgam_guard(g: &RationalWindow) -> Result<f64> {
    let sum: C64 = g.a().iter().sum();
    let scale: f64 = g.a().iter().map(|a| a.norm()).sum();
    if sum.norm() > 1e-12 * scale.max(1.0) {
        return Err(Error::NotAmalgam { sum: sum.norm() });
    }
    // |g'| ≤ Σ|aₖ|/|t − iwₖ|² ≤ Σ|aₖ|/(Re wₖ)².
    let lip: f64 = g.a().iter().zip(g.w()).map(|(a, w)| a.norm() / (w.re * w.re)).sum();
    let h = 1.0 / AMALGAM_SAMPLES as f64;
    let cells: f64 = (-AMALGAM_CELLS..AMALGAM_CELLS)
        .into_par_iter()
        .map(|k| {
            let m = (0..=AMALGAM_SAMPLES)
                .map(|i| g.eval(k as f64 + i as f64 * h).norm())
                .fold(0.0, f64::max);
            m + 0.5 * h * lip
        })
        .sum();
    // With Σa = 0, g(t) = Σ aₖ i wₖ/(t(t − i wₖ)), so |g(t)| ≤ C/(|t|(|t| − W)).
    let c: f64 = g.a().iter().zip(g.w()).map(|(a, w)| a.norm() * w.norm()).sum();
    let wmax = g.w().iter().map(|w| w.norm()).fold(0.0, f64::max);
    let k = AMALGAM_CELLS as f64;
    let tail = 2.0 * c / (k - wmax - 1.0);
    Ok(cells + tail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SISExperiment {
    pub g: RationalWindow,
    pub alpha: f64,
    pub trials: usize,
    pub coeff_len: usize,
    pub seed: u64,
    /// `Σ|f(αj)|²/‖c‖²` for each random trial.
    pub ratios: Vec<f64>,
    /// Extreme eigenvalues of `SᴴS` (adversarial directions).
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub a_emp: f64,
    pub b_emp: f64,
    /// `⌈1/α⌉·‖g‖²_{W₀}` when the window is zero-sum.
    pub amalgam_bound: Option<f64>,
    /// Half-width `J` of the sampled range beyond the coefficient support.
    pub sample_range: f64,
    pub samples: usize,
}

/// Sampling matrix `S_{j,k} = g(t_j − k)` for points `t_j ∈ αℤ ∩ [−J, L + J]`.
pub fn sampling_matrix(g: &RationalWindow, alpha: f64, coeff_len: usize) -> (DMatrix<C64>, f64) {
    let rate = crate::TWO_PI * min_abs_re(g);
    let range = coeff_len as f64 * (4.0 + (1.0 / rate).max(1.0));
    let j_lo = (-range / alpha).floor() as i64;
    let j_hi = ((coeff_len as f64 + range) / alpha).ceil() as i64;
    let pts: Vec<f64> = (j_lo..=j_hi).map(|j| alpha * j as f64).collect();
    let s = DMatrix::from_fn(pts.len(), coeff_len, |r, k| g.eval(pts[r] - k as f64));
    (s, range)
}

/// Random trials plus the extreme directions, without the hypothesis guards.
pub fn sampling_ratios(g: &RationalWindow, alpha: f64, trials: usize, coeff_len: usize, seed: u64) -> Result<SISExperiment> {
    if !(alpha > 0.0) || coeff_len == 0 {
        return Err(Error::Input("alpha must be positive and coeff_len nonzero".into()));
    }
    let (s, range) = sampling_matrix(g, alpha, coeff_len);
    let gram = s.adjoint() * &s;
    let eig = gram.clone().symmetric_eigen();
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut rng = StdRng::seed_from_u64(seed);
    let vecs: Vec<DVector<C64>> = (0..trials)
        .map(|_| {
            let v = DVector::from_fn(coeff_len, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            let n = v.norm();
            v / C64::new(n, 0.0)
        })
        .collect();
    let ratios: Vec<f64> = vecs.par_iter().map(|c| (&s * c).norm_squared()).collect();
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    let amalgam_bound = amalgam_guard(g).ok().map(|n| (1.0 / alpha).ceil() * n * n);
    Ok(SISExperiment {
        g: g.clone(),
        alpha,
        trials,
        coeff_len,
        seed,
        ratios,
        lambda_min,
        lambda_max,
        a_emp: lambda_min.min(rmin),
        b_emp: lambda_max.max(rmax),
        amalgam_bound,
        sample_range: range,
        samples: s.nrows(),
    })
}

/// Guarded experiment: stable shifts, amalgam membership and `m₀ ≠ 0` on `ξ > 0`.
pub fn sampling_experiment(g: &RationalWindow, alpha: f64, trials: usize, coeff_len: usize, seed: u64) -> Result<SISExperiment> {
    let margin = stability_margin(g);
    if !(margin > 0.0) {
        return Err(Error::Unstable { margin });
    }
    amalgam_guard(g)?;
    if alpha > 0.0 && alpha < 1.0 {
        let tab = multiplier_table(g, alpha)?;
        let m0 = m0_nonvanishing(&tab)?;
        if !m0.ok {
            return Err(Error::M0Vanishes { xi: m0.zero_at });
        }
    }
    sampling_ratios(g, alpha, trials, coeff_len, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    #[test]
    fn margin_single_pole() {
        let g = RationalWindow::real(&[1.0], &[-1.0]).unwrap();
        let m = stability_margin(&g);
        // Σ_{j≥0} e^{−4π(ξ+j)} at the last grid point.
        let xi = (MARGIN_GRID as f64 - 0.5) / MARGIN_GRID as f64;
        let want = (-2.0 * TWO_PI * xi).exp() / (1.0 - (-2.0 * TWO_PI).exp());
        assert!((m - want).abs() < 1e-12 * want);
        let g2 = g.scaled(C64::new(2.0, 0.0)).unwrap();
        assert!((stability_margin(&g2) - 4.0 * m).abs() < 1e-12 * m);
    }

    #[test]
    fn margin_mixed_sides() {
        let g = RationalWindow::real(&[1.0, -1.0], &[1.0, -2.0]).unwrap();
        assert!(stability_margin(&g) > 0.0);
    }

    #[test]
    fn amalgam_examples() {
        let g = RationalWindow::real(&[1.0, -1.0], &[1.0, 2.0]).unwrap();
        let n = amalgam_guard(&g).unwrap();
        assert!(n.is_finite() && n > 0.0);
        let g2 = g.scaled(C64::new(2.0, 0.0)).unwrap();
        assert!((amalgam_guard(&g2).unwrap() - 2.0 * n).abs() < 1e-9 * n);
        let g1 = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        assert!(matches!(amalgam_guard(&g1), Err(Error::NotAmalgam { .. })));
    }

    #[test]
    fn experiment_bounds() {
        let g = RationalWindow::real(&[1.0, -1.0], &[1.0, 2.0]).unwrap();
        let e = sampling_experiment(&g, std::f64::consts::FRAC_1_SQRT_2, 20, 16, 7).unwrap();
        assert!(e.a_emp > 0.0 && e.a_emp <= e.b_emp);
        assert!(e.ratios.iter().all(|r| *r >= e.lambda_min * (1.0 - 1e-9) && *r <= e.lambda_max * (1.0 + 1e-9)));
        assert!(e.b_emp <= e.amalgam_bound.unwrap());
        let again = sampling_experiment(&g, std::f64::consts::FRAC_1_SQRT_2, 20, 16, 7).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn nonincreasing_lower_ratio() {
        let g = RationalWindow::real(&[1.0, -1.0], &[1.0, 2.0]).unwrap();
        let a16 = sampling_ratios(&g, 0.7, 0, 16, 1).unwrap().lambda_min;
        let a32 = sampling_ratios(&g, 0.7, 0, 32, 1).unwrap().lambda_min;
        assert!(a32 <= a16 * 1.05);
    }
}
