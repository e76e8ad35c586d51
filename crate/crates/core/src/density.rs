//! High density `αβ ≤ 1/N`: the block `B(θ,N)` and its factorization `B = XY`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense_sigma_min, log_det, log_relative_gap};
use crate::multipliers::{multiplier_table, MultiplierTable};
use crate::oracle::upper_bound_estimate;
use crate::report::{Certificate, CertificationReport, Method, Verdict};
use crate::window::{rescale_to_unit_beta, Lattice};
use crate::{RationalWindow, TWO_PI};

/// Number of θ samples in the diagnostic grid.
pub const THETA_GRID: usize = 512;

/// Rows `M(θ), M(θ−1), …, M(θ−N+1)`; meaningful for `θ ≥ N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockB {
    pub theta: f64,
    pub mat: DMatrix<C64>,
}

impl BlockB {
    /// Each row scaled to unit sup-norm.
    pub fn row_normalized(&self) -> DMatrix<C64> {
        let mut m = self.mat.clone();
        for mut row in m.row_iter_mut() {
            let s = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if s > 0.0 {
                row /= C64::new(s, 0.0);
            }
        }
        m
    }
}

pub fn build_b(tab: &MultiplierTable, theta: f64) -> BlockB {
    let n = tab.n();
    let mut mat = DMatrix::zeros(n, n);
    for r in 0..n {
        for (s, v) in tab.string(theta - r as f64).into_iter().enumerate() {
            mat[(r, s)] = v;
        }
    }
    BlockB { theta, mat }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetFactorization {
    pub det_b: C64,
    pub det_x: C64,
    pub det_y: C64,
    /// `|det B − det X·det Y| / |det B|`.
    pub residual: f64,
    /// Relative mismatch of `det Y` against `±Π_{k<l}(uₖ − u_l)`.
    pub det_y_residual: f64,
}

/// `X_{r,k} = Aₖ yₖ^r` with `Aₖ = aₖe^{2πθwₖ}`, `yₖ = e^{−2πwₖ}`.
pub fn factor_x(tab: &MultiplierTable, theta: f64) -> DMatrix<C64> {
    let n = tab.n();
    DMatrix::from_fn(n, n, |r, k| {
        let w = tab.w()[k];
        tab.a()[k] * (w * TWO_PI * theta).exp() * (-w * TWO_PI * r as f64).exp()
    })
}

/// `Y_{k,s}`: coefficient of `zˢ` in `Π_{j≠k}(1 − z u_j)`.
pub fn factor_y(tab: &MultiplierTable) -> DMatrix<C64> {
    let n = tab.n();
    DMatrix::from_fn(n, n, |k, s| tab.coeff(k, s))
}

/// Determinants are compared in the log domain; `Overflow` when an entry of `Y` is not finite.
pub fn det_b_factorization(tab: &MultiplierTable, theta: f64) -> Result<DetFactorization> {
    let b = build_b(tab, theta).mat;
    let x = factor_x(tab, theta);
    let y = factor_y(tab);
    for m in [&b, &x, &y] {
        if let Some(v) = m.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Overflow { exponent: v.norm().ln() });
        }
    }
    let (lb, lx, ly) = (log_det(&b), log_det(&x), log_det(&y));
    let residual = log_relative_gap(lb, (lx.0 + ly.0, lx.1 * ly.1));
    let u = tab.u();
    let (mut lv, mut pv) = (0.0, C64::new(1.0, 0.0));
    for k in 0..u.len() {
        for l in k + 1..u.len() {
            let d = u[k] - u[l];
            lv += d.norm().ln();
            pv *= d / d.norm();
        }
    }
    let det_y_residual = log_relative_gap(ly, (lv, pv)).min(log_relative_gap(ly, (lv, -pv)));
    let value = |p: (f64, C64)| p.1 * p.0.exp();
    Ok(DetFactorization { det_b: value(lb), det_x: value(lx), det_y: value(ly), residual, det_y_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDensityCertificate {
    pub theta_range: (f64, f64),
    pub grid: usize,
    /// `inf σ_min` of the row-normalized `B(θ,N)` over the grid.
    pub sigma_min_inf: f64,
    pub max_factorization_residual: f64,
    pub max_det_y_residual: f64,
    /// Every `|det B(θ)| > 0` on the grid.
    pub det_nonzero: bool,
}

pub fn certify_high_density(g: &RationalWindow, lat: &Lattice) -> Result<CertificationReport> {
    let n = g.len();
    let density = lat.normalized_alpha();
    if density > 1.0 / n as f64 + 1e-12 {
        return Err(Error::DensityTooHigh { density });
    }
    if !g.class().distinct_re {
        return Err(Error::DegenerateRe);
    }
    let (h, alpha) = rescale_to_unit_beta(g, lat);
    let tab = multiplier_table(&h, alpha)?;
    let lo = (n - 1) as f64;
    let hi = lo + 1.0 / alpha;
    let per: Vec<(f64, f64, f64, bool)> = (0..THETA_GRID)
        .into_par_iter()
        .map(|i| {
            let theta = lo + (i as f64 + 0.5) / THETA_GRID as f64 * (hi - lo);
            let b = build_b(&tab, theta);
            let nb = b.row_normalized();
            let f = det_b_factorization(&tab, theta)?;
            Ok((dense_sigma_min(&nb), f.residual, f.det_y_residual, nb.determinant().norm() > 0.0))
        })
        .collect::<Result<_>>()?;
    let cert = HighDensityCertificate {
        theta_range: (lo, hi),
        grid: THETA_GRID,
        sigma_min_inf: per.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        max_factorization_residual: per.iter().map(|p| p.1).fold(0.0, f64::max),
        max_det_y_residual: per.iter().map(|p| p.2).fold(0.0, f64::max),
        det_nonzero: per.iter().all(|p| p.3),
    };
    let mut rep = CertificationReport::new(Verdict::FrameCertified, Method::HighDensity, Certificate::HighDensity(cert));
    rep.b_crit = Some(upper_bound_estimate(&tab));
    rep.diag("bound", "determinant lemma; sigma_min_inf is a grid diagnostic");
    Ok(rep)
}
