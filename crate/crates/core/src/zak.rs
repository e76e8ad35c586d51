//! The function `𝒵(z,ξ) = Σ aₖe^{2πξwₖ}/(1 − z uₖ)`, its positivity on the unit
//! circle, the near-critical certifier and the `αβ = 1` check.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::certified_min_modulus;
use crate::herglotz::{frobenius_matrix, SERIES_GRID};
use crate::linalg::{spectral_norm, winding_number};
use crate::multipliers::{multiplier_table, MultiplierTable};
use crate::oracle::upper_bound_estimate;
use crate::report::{Certificate, CertificationReport, Method, Verdict};
use crate::window::{rescale_to_unit_beta, Lattice, RationalWindow};
use crate::TWO_PI;

/// Default torus grid `(t_steps, ξ_steps)`.
pub const DEFAULT_GRID: (usize, usize) = (1024, 512);
const POLE_TOL: f64 = 1e-14;
const MAX_POWER: usize = 4096;
const MAX_WINDOW: usize = 1 << 15;

fn zak_terms(tab: &MultiplierTable, z: C64, xi: f64) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for ((a, w), u) in tab.a().iter().zip(tab.w()).zip(tab.u()) {
        let den = C64::new(1.0, 0.0) - z * u;
        if den.norm() <= POLE_TOL * (z * u).norm().max(1.0) {
            return Err(Error::PoleHit);
        }
        s += a * (w * TWO_PI * xi).exp() / den;
    }
    Ok(s)
}

/// `𝒵(z,ξ)` with `uₖ = e^{2πwₖ/α'}`.
pub fn zak_eval(g: &RationalWindow, alpha: f64, z: C64, xi: f64) -> Result<C64> {
    zak_terms(&multiplier_table(g, alpha)?, z, xi)
}

/// `(c, λ)` pairs of the `k`-th term, for dominance arguments.
fn term_weights(tab: &MultiplierTable) -> Vec<(f64, f64)> {
    tab.a()
        .iter()
        .zip(tab.w())
        .zip(tab.u())
        .map(|((a, w), u)| (a.norm() / (u.norm() - 1.0).abs(), TWO_PI * w.re))
        .collect()
}

/// Smallest `x ≥ 0` (in direction `dir = ±1`) beyond which `lead·e^{λ_d dir x}`
/// exceeds `Σ_{k≠d} cₖe^{λₖ dir x}`. `None` if the leading rate is not strictly largest.
fn dominance_threshold(lead: f64, d: usize, others: &[(f64, f64)], dir: f64) -> Option<f64> {
    let ld = dir * others[d].1;
    let excess = |x: f64| -> f64 {
        others
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != d)
            .map(|(_, (c, l))| c * ((dir * l - ld) * x).exp())
            .sum::<f64>()
            - lead
    };
    if others
        .iter()
        .enumerate()
        .any(|(k, (_, l))| k != d && dir * l >= ld)
    {
        return None;
    }
    if excess(0.0) < 0.0 {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while excess(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    /// Grid minimum of `Re 𝒵/S(ξ)` where `S(ξ) = Σ|aₖ|e^{2πξ Re wₖ}`.
    pub min_value: f64,
    pub grid: (usize, usize),
    pub lipschitz_slack: f64,
    pub certified: bool,
    /// Grid range `[ξ₋, ξ₊]`; outside it the dominant term decides the sign.
    pub xi_range: (f64, f64),
    pub asymptotic_positive: bool,
}

/// Lower bound of `Re 𝒵` on one cell around a node, normalized by `S(ξ_node)`.
fn cell_values(tab: &MultiplierTable, t: f64, xi: f64, ht: f64, hx: f64) -> Result<(f64, f64)> {
    let z = C64::from_polar(1.0, TWO_PI * t);
    let val = zak_terms(tab, z, xi)?.re;
    let mut slack = 0.0;
    let mut scale = 0.0;
    for ((a, w), u) in tab.a().iter().zip(tab.w()).zip(tab.u()) {
        let e = (TWO_PI * xi * w.re).exp();
        let emax = e * (std::f64::consts::PI * hx * w.re.abs()).exp();
        let un = u.norm();
        let d0 = (C64::new(1.0, 0.0) - z * u).norm();
        let d = (d0 - std::f64::consts::PI * ht * un).max((un - 1.0).abs());
        slack += a.norm() * emax * (0.5 * ht * TWO_PI * un / (d * d) + 0.5 * hx * TWO_PI * w.norm() / d);
        scale += a.norm() * e;
    }
    Ok((val / scale, (val - slack) / scale))
}

/// Grid certificate of `Re 𝒵(e^{2πit}, ξ) > 0` for all `t, ξ`.
pub fn re_zak_certificate(g: &RationalWindow, alpha: f64, grid: (usize, usize)) -> Result<PositivityCertificate> {
    let cls = g.class();
    if !cls.all_re_neg && !cls.all_re_pos {
        return Err(Error::MixedHalfPlanes);
    }
    let tab = multiplier_table(g, alpha)?;
    let weights = term_weights(&tab);
    let n = tab.n();
    let a = tab.a();
    let w = tab.w();
    // Sorted by Re w: the last term leads as ξ → +∞, the first as ξ → −∞.
    let lead_ok = |k: usize| {
        a[k].im.abs() <= 1e-14 * a[k].norm() && a[k].re > 0.0 && w[k].im.abs() <= 1e-14 * w[k].norm()
    };
    let lower = |k: usize| a[k].norm() / (1.0 + tab.u()[k].norm());
    let hi = if lead_ok(n - 1) { dominance_threshold(lower(n - 1), n - 1, &weights, 1.0) } else { None };
    let lo = if lead_ok(0) { dominance_threshold(lower(0), 0, &weights, -1.0) } else { None };
    let asymptotic_positive = n == 1 || (hi.is_some() && lo.is_some());
    let xi_hi = hi.unwrap_or(1.0).max(1.0);
    let xi_lo = -lo.unwrap_or(1.0).max(1.0);

    let mut grid = grid;
    for attempt in 0..3 {
        let (nt, nx) = grid;
        let ht = 1.0 / nt as f64;
        let hx = (xi_hi - xi_lo) / nx as f64;
        let cells: Vec<Result<(f64, f64)>> = (0..nx)
            .into_par_iter()
            .map(|j| {
                let xi = xi_lo + (j as f64 + 0.5) * hx;
                let mut best = (f64::INFINITY, f64::INFINITY);
                for i in 0..nt {
                    let (v, lb) = cell_values(&tab, (i as f64 + 0.5) * ht, xi, ht, hx)?;
                    best = (best.0.min(v), best.1.min(lb));
                }
                Ok(best)
            })
            .collect();
        let mut min_value = f64::INFINITY;
        let mut min_lb = f64::INFINITY;
        for c in cells {
            let (v, lb) = c?;
            min_value = min_value.min(v);
            min_lb = min_lb.min(lb);
        }
        let cert = PositivityCertificate {
            min_value,
            grid,
            lipschitz_slack: min_value - min_lb,
            certified: min_lb > 0.0 && asymptotic_positive,
            xi_range: (xi_lo, xi_hi),
            asymptotic_positive,
        };
        if min_value <= 0.0 || !asymptotic_positive || cert.certified {
            return Ok(cert);
        }
        if attempt == 2 {
            return Err(Error::InconclusivePositivity { min: min_value, slack: cert.lipschitz_slack });
        }
        grid = (2 * nt, 2 * nx);
    }
    unreachable!()
}

/// Partial cosine series against `Re 𝒵(e^{it},ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    pub residual: f64,
    pub tail_bound: f64,
}

/// Compare `Σ_{n≤terms} Re(m₀(ξ+n/α')e^{int})` with `Re 𝒵(e^{it},ξ)`.
///
/// For real `m₀` the summand is `m₀(ξ+n/α') cos(nt)`.
pub fn cosine_series_residual(g: &RationalWindow, alpha: f64, xi: f64, t: f64, terms: usize) -> Result<CosineSeries> {
    let tab = multiplier_table(g, alpha)?;
    if tab.u().iter().any(|u| u.norm() >= 1.0) {
        return Err(Error::DivergentSeries);
    }
    let z = C64::from_polar(1.0, t);
    let exact = zak_terms(&tab, z, xi)?.re;
    let partial: f64 = (0..=terms)
        .map(|n| (tab.m(0).eval(xi + n as f64 / alpha) * C64::from_polar(1.0, n as f64 * t)).re)
        .sum();
    let tail_bound = tab
        .a()
        .iter()
        .zip(tab.w())
        .zip(tab.u())
        .map(|((a, w), u)| {
            let r = u.norm();
            a.norm() * (TWO_PI * xi * w.re).exp() * r.powi(terms as i32 + 1) / (1.0 - r)
        })
        .sum();
    Ok(CosineSeries { residual: (partial - exact).abs(), tail_bound })
}

/// Is `Σ cₖe^{λₖx}` (all `λₖ < 0`) positive on `[0, ∞)`?
fn positive_on_half_line(terms: &[(f64, f64)]) -> bool {
    let d = terms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .expect("nonempty");
    let lead = terms[d].0;
    if lead <= 0.0 {
        return false;
    }
    let weights: Vec<(f64, f64)> = terms.iter().map(|(c, l)| (c.abs(), *l)).collect();
    let Some(x_tail) = dominance_threshold(lead, d, &weights, 1.0) else {
        return false;
    };
    if x_tail == 0.0 {
        return true;
    }
    let f = |x: f64| terms.iter().map(|(c, l)| c * (l * x).exp()).sum::<f64>();
    let slope = |x: f64| terms.iter().map(|(c, l)| (c * l).abs() * (l * x).exp()).sum::<f64>();
    let mut cells = 1024;
    while cells <= 1 << 20 {
        let h = x_tail / cells as f64;
        let mut ok = true;
        for i in 0..cells {
            let x = (i as f64 + 0.5) * h;
            // λ < 0, so the slope bound is largest at the cell's left end.
            let lb = f(x) - 0.5 * h * slope(x - 0.5 * h);
            if f(x) <= 0.0 {
                return false;
            }
            ok &= lb > 0.0;
        }
        if ok {
            return true;
        }
        cells *= 8;
    }
    false
}

/// `(positive, decreasing, convex)` for `m₀` on `ξ ≥ 0`.
pub fn convexity_profile(g: &RationalWindow) -> Result<(bool, bool, bool)> {
    let real = g.a().iter().all(|a| a.im == 0.0) && g.w().iter().all(|w| w.im == 0.0 && w.re < 0.0);
    if !real {
        return Err(Error::NotRealProfile);
    }
    let base: Vec<(f64, f64)> = g.a().iter().zip(g.w()).map(|(a, w)| (a.re, TWO_PI * w.re)).collect();
    let deriv = |j: i32, sign: f64| -> Vec<(f64, f64)> {
        base.iter().map(|(c, l)| (sign * c * l.powi(j), *l)).collect()
    };
    Ok((
        positive_on_half_line(&base),
        positive_on_half_line(&deriv(1, -1.0)),
        positive_on_half_line(&deriv(2, 1.0)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `Re w > 0`: `p_ξ = Σ m_s zˢ / m_{N−1}`, shifts `ξ − j/α'`.
    Forward,
    /// `Re w < 0`: reversed polynomial over `m₀`, shifts `ξ + j/α'`.
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearCriticalCertificate {
    pub direction: Direction,
    pub rho: f64,
    pub max_root_modulus: f64,
    /// `ρ` exceeds every `|uₖ|^{∓1}` that lies inside the disk.
    pub rho_exceeds_u: bool,
    /// Smallest `M` with `sup ‖F^M(p_ξ)‖₂ < 1` on the grid.
    pub power: usize,
    pub power_norm: f64,
    /// Length of the window product that contracts.
    pub window: usize,
    pub window_norm: f64,
    pub c_sigma: f64,
    pub min_leading: f64,
    pub grid: usize,
    pub positivity: Option<PositivityCertificate>,
}

fn monic_at(tab: &MultiplierTable, dir: Direction, xi: f64) -> Result<Vec<C64>> {
    let mut m = tab.string(xi);
    if dir == Direction::Backward {
        m.reverse();
    }
    let lead = *m.last().expect("N ≥ 1");
    if lead.norm() == 0.0 {
        return Err(Error::LeadingVanishes { xi });
    }
    Ok(m.iter().map(|c| c / lead).collect())
}

fn shifted(alpha: f64, dir: Direction, xi: f64, j: usize) -> f64 {
    let s = j as f64 / alpha;
    match dir {
        Direction::Forward => (xi - s).rem_euclid(1.0),
        Direction::Backward => (xi + s).rem_euclid(1.0),
    }
}

fn window_product(tab: &MultiplierTable, dir: Direction, xi: f64, len: usize) -> Result<(DMatrix<C64>, Vec<f64>)> {
    let n = tab.n() - 1;
    let mut prod = DMatrix::<C64>::identity(n, n);
    let mut norms = Vec::with_capacity(len);
    for j in 0..len {
        norms.push(spectral_norm(&prod));
        let f = frobenius_matrix(&monic_at(tab, dir, shifted(tab.alpha(), dir, xi, j))?)?;
        prod *= f;
    }
    Ok((prod, norms))
}

fn roots(monic: &[C64]) -> Result<Vec<C64>> {
    let f = frobenius_matrix(monic)?;
    Ok(f.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default())
}

pub fn certify_near_critical(g: &RationalWindow, lat: &Lattice) -> Result<CertificationReport> {
    let density = lat.normalized_alpha();
    if (density - 1.0).abs() <= 1e-12 {
        return critical_density_check(g, lat);
    }
    if density > 1.0 {
        return Err(Error::DensityTooLow { density });
    }
    let cls = g.class();
    let dir = if cls.all_re_pos {
        Direction::Forward
    } else if cls.all_re_neg {
        Direction::Backward
    } else {
        return Err(Error::MixedHalfPlanes);
    };
    let (h, alpha) = rescale_to_unit_beta(g, lat);
    let tab = multiplier_table(&h, alpha)?;
    let positivity = if dir == Direction::Backward {
        match re_zak_certificate(&h, alpha, DEFAULT_GRID) {
            Ok(c) if c.certified => Some(c),
            Ok(_) => return Err(Error::PositivityFails),
            Err(Error::InconclusivePositivity { .. }) => {
                return Ok(CertificationReport::inconclusive(Method::NearCritical, "positivity grid inconclusive"))
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let lead_index = match dir {
        Direction::Forward => tab.n() - 1,
        Direction::Backward => 0,
    };
    let (min_leading, _) = certified_min_modulus(tab.m(lead_index), 0.0, 1.0, 8 * SERIES_GRID);
    if min_leading <= 0.0 {
        return Err(Error::LeadingVanishes { xi: 0.0 });
    }
    let n = tab.n() - 1;
    let grid: Vec<f64> = (0..SERIES_GRID).map(|i| i as f64 / SERIES_GRID as f64).collect();
    let u_inside = tab
        .u()
        .iter()
        .map(|u| match dir {
            Direction::Forward => 1.0 / u.norm(),
            Direction::Backward => u.norm(),
        })
        .fold(0.0, f64::max);
    let mut cert = NearCriticalCertificate {
        direction: dir,
        rho: 0.0,
        max_root_modulus: 0.0,
        rho_exceeds_u: true,
        power: 0,
        power_norm: 0.0,
        window: 0,
        window_norm: 0.0,
        c_sigma: 1.0,
        min_leading,
        grid: SERIES_GRID,
        positivity,
    };
    let fail = |cert: NearCriticalCertificate, why: &str| {
        let mut r = CertificationReport::new(Verdict::Inconclusive, Method::NearCritical, Certificate::NearCritical(cert));
        r.diag("reason", why);
        Ok(r)
    };

    if n > 0 {
        // (i) root location by the argument principle.
        let max_root = grid
            .par_iter()
            .map(|&xi| -> Result<f64> {
                Ok(roots(&monic_at(&tab, dir, xi)?)?.iter().map(|r| r.norm()).fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cert.max_root_modulus = max_root;
        if max_root >= 1.0 {
            return fail(cert, "roots outside the unit disk");
        }
        let rho = 0.5 * (1.0 + max_root);
        cert.rho = rho;
        cert.rho_exceeds_u = rho > u_inside || u_inside >= 1.0;
        let winding_ok = grid.par_iter().all(|&xi| {
            let Ok(p) = monic_at(&tab, dir, xi) else { return false };
            winding_number(|z| crate::linalg::poly_eval(&p, z), C64::new(0.0, 0.0), rho)
                .is_some_and(|w| (w - n as f64).abs() < 0.01)
        });
        if !winding_ok {
            return fail(cert, "winding count differs from N−1");
        }

        // (ii) a power of the single-step matrix that contracts.
        let powers: Vec<(usize, f64)> = grid
            .par_iter()
            .map(|&xi| -> Result<(usize, f64)> {
                let f = frobenius_matrix(&monic_at(&tab, dir, xi)?)?;
                let mut p = f.clone();
                for m in 1..=MAX_POWER {
                    let nrm = spectral_norm(&p);
                    if nrm < 1.0 {
                        return Ok((m, nrm));
                    }
                    p *= &f;
                }
                Ok((usize::MAX, f64::INFINITY))
            })
            .collect::<Result<_>>()?;
        let power = powers.iter().map(|p| p.0).max().unwrap_or(1);
        if power == usize::MAX {
            return fail(cert, "no contracting power");
        }
        let pow_f = |xi: f64| -> Result<f64> {
            let f = frobenius_matrix(&monic_at(&tab, dir, xi)?)?;
            let mut p = DMatrix::<C64>::identity(n, n);
            for _ in 0..power {
                p *= &f;
            }
            Ok(spectral_norm(&p))
        };
        cert.power = power;
        cert.power_norm = grid.par_iter().map(|&x| pow_f(x)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);

        // (iii) the shifted window product.
        let mut len = power;
        let (q_window, b_head) = loop {
            let per: Vec<(f64, f64)> = grid
                .par_iter()
                .map(|&xi| -> Result<(f64, f64)> {
                    let (p, norms) = window_product(&tab, dir, xi, len)?;
                    Ok((spectral_norm(&p), norms.into_iter().fold(0.0, f64::max)))
                })
                .collect::<Result<_>>()?;
            let q = per.iter().map(|p| p.0).fold(0.0, f64::max);
            let b = per.iter().map(|p| p.1).fold(0.0, f64::max);
            if q < 1.0 {
                break (q, b);
            }
            cert.window = len;
            cert.window_norm = q;
            len *= 2;
            if len > MAX_WINDOW {
                return fail(cert, "window product does not contract");
            }
        };
        cert.window = len;
        cert.window_norm = q_window;

        // Σ_s ‖Π_{j<s}‖: explicit head of K windows, geometric tail beyond.
        let k_windows = ((1e-3f64).ln() / q_window.ln()).ceil().clamp(1.0, 64.0) as usize;
        let tail = q_window.powi(k_windows as i32) * len as f64 * b_head / (1.0 - q_window);
        let head = grid
            .par_iter()
            .map(|&xi| -> Result<f64> {
                let (_, norms) = window_product(&tab, dir, xi, k_windows * len)?;
                Ok(norms.iter().sum())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        cert.c_sigma = head + tail;
    }
    let a_crit = (min_leading / cert.c_sigma).powi(2);
    let mut rep = CertificationReport::new(Verdict::FrameCertified, Method::NearCritical, Certificate::NearCritical(cert));
    rep.a_crit = Some(a_crit);
    rep.b_crit = Some(upper_bound_estimate(&tab));
    rep.diag("bound", "criterion operator");
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCertificate {
    /// Grid minimum of `|𝒵(e^{2πit},ξ)|` over `[0,1)²`.
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub lipschitz_slack: f64,
    pub grid: (usize, usize),
    /// `(t, ξ)` of a located zero.
    pub zero: Option<(f64, f64)>,
    pub zero_residual: Option<f64>,
}

/// `(|𝒵|, slack, scale)` on the cell around `(t, ξ)`.
fn torus_cell(tab: &MultiplierTable, t: f64, xi: f64, ht: f64, hx: f64) -> Result<(f64, f64)> {
    let z = C64::from_polar(1.0, TWO_PI * t);
    let v = zak_terms(tab, z, xi)?.norm();
    let mut slack = 0.0;
    for ((a, w), u) in tab.a().iter().zip(tab.w()).zip(tab.u()) {
        let emax = (TWO_PI * xi * w.re).exp() * (std::f64::consts::PI * hx * w.re.abs()).exp();
        let un = u.norm();
        let d0 = (C64::new(1.0, 0.0) - z * u).norm();
        let d = (d0 - std::f64::consts::PI * ht * un).max((un - 1.0).abs());
        slack += a.norm() * emax * (0.5 * ht * TWO_PI * un / (d * d) + 0.5 * hx * TWO_PI * w.norm() / d);
    }
    Ok((v, slack))
}

/// Newton's method for `𝒵(e^{2πit}, ξ) = 0` in the real unknowns `(t, ξ)`.
fn newton_zero(tab: &MultiplierTable, t0: f64, x0: f64) -> Option<(f64, f64, f64)> {
    let (mut t, mut x) = (t0, x0);
    for _ in 0..100 {
        let z = C64::from_polar(1.0, TWO_PI * t);
        let mut f = C64::new(0.0, 0.0);
        let mut ft = C64::new(0.0, 0.0);
        let mut fx = C64::new(0.0, 0.0);
        for ((a, w), u) in tab.a().iter().zip(tab.w()).zip(tab.u()) {
            let e = a * (w * TWO_PI * x).exp();
            let den = C64::new(1.0, 0.0) - z * u;
            f += e / den;
            ft += e * C64::new(0.0, TWO_PI) * z * u / (den * den);
            fx += e * w * TWO_PI / den;
        }
        let det = ft.re * fx.im - ft.im * fx.re;
        if det.abs() < 1e-300 {
            return None;
        }
        let dt = (f.re * fx.im - f.im * fx.re) / det;
        let dx = (ft.re * f.im - ft.im * f.re) / det;
        t -= dt;
        x -= dx;
        if dt.abs() + dx.abs() < 1e-15 {
            break;
        }
    }
    let z = C64::from_polar(1.0, TWO_PI * t);
    let v = zak_terms(tab, z, x).ok()?.norm();
    let scale: f64 = tab.a().iter().zip(tab.w()).map(|(a, w)| a.norm() * (TWO_PI * x * w.re).exp()).sum();
    (v <= 1e-10 * scale).then_some((t.rem_euclid(1.0), x, v))
}

/// `αβ = 1`: the frame operator is a multiplication by `|𝒵|²` on the torus.
pub fn critical_density_check(g: &RationalWindow, lat: &Lattice) -> Result<CertificationReport> {
    let density = lat.normalized_alpha();
    if (density - 1.0).abs() > 1e-12 {
        return Err(Error::NotCritical { density });
    }
    let (h, _) = rescale_to_unit_beta(g, lat);
    let tab = multiplier_table(&h, 1.0)?;
    let mut grid = DEFAULT_GRID;
    for attempt in 0..3 {
        let (nt, nx) = grid;
        let (ht, hx) = (1.0 / nt as f64, 1.0 / nx as f64);
        let rows: Vec<Result<(f64, f64, f64, f64, f64)>> = (0..nx)
            .into_par_iter()
            .map(|j| {
                let xi = (j as f64 + 0.5) * hx;
                let mut r = (f64::INFINITY, f64::INFINITY, 0.0, 0.0, xi);
                for i in 0..nt {
                    let t = (i as f64 + 0.5) * ht;
                    let (v, s) = torus_cell(&tab, t, xi, ht, hx)?;
                    if v < r.0 {
                        r.0 = v;
                        r.3 = t;
                    }
                    r.1 = r.1.min(v - s);
                    r.2 = f64::max(r.2, v + s);
                }
                Ok(r)
            })
            .collect();
        let (mut vmin, mut lbmin, mut vmax, mut at) = (f64::INFINITY, f64::INFINITY, 0.0f64, (0.0, 0.0));
        for r in rows {
            let (v, lb, ub, t, xi) = r?;
            if v < vmin {
                vmin = v;
                at = (t, xi);
            }
            lbmin = lbmin.min(lb);
            vmax = vmax.max(ub);
        }
        let mut cert = CriticalCertificate {
            min_modulus: vmin,
            max_modulus: vmax,
            lipschitz_slack: vmin - lbmin,
            grid,
            zero: None,
            zero_residual: None,
        };
        if lbmin > 0.0 {
            let mut rep = CertificationReport::new(Verdict::FrameCertified, Method::Critical, Certificate::Critical(cert));
            rep.a_crit = Some(lbmin * lbmin);
            rep.b_crit = Some(vmax * vmax);
            rep.diag("bound", "multiplication by |Z|^2 on the torus");
            return Ok(rep);
        }
        if let Some((t, xi, res)) = newton_zero(&tab, at.0, at.1) {
            cert.zero = Some((t, xi));
            cert.zero_residual = Some(res);
            let mut rep =
                CertificationReport::new(Verdict::NotFrameWitnessed, Method::Critical, Certificate::Critical(cert));
            rep.a_crit = Some(0.0);
            rep.diag("zero_t", t).diag("zero_xi", xi);
            return Ok(rep);
        }
        if attempt == 2 {
            return Err(Error::InconclusivePositivity { min: vmin, slack: vmin - lbmin });
        }
        grid = (2 * nt, 2 * nx);
    }
    unreachable!()
}

/// `a₂` for which `𝒵(z₀, ξ₀) = 0` when `a₁ = 1` and `α' = 1`.
pub fn synthetic_zero_coefficient(w: [C64; 2], z0: C64, xi0: f64) -> C64 {
    let e = |w: C64| (w * TWO_PI * xi0).exp();
    let u = |w: C64| (w * TWO_PI).exp();
    let one = C64::new(1.0, 0.0);
    -e(w[0]) * (one - z0 * u(w[1])) / (e(w[1]) * (one - z0 * u(w[0])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::identity_residuals;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zak_examples() {
        let g = RationalWindow::real(&[1.0, -0.3], &[-1.0, -0.5]).unwrap();
        assert_eq!(zak_eval(&g, 0.8, c(0.0), 0.3).unwrap(), g.m0(0.3));
        let g1 = RationalWindow::real(&[1.0], &[-1.0]).unwrap();
        let v = zak_eval(&g1, 1.0, c(0.5), 0.0).unwrap();
        assert!((v.re - 1.0 / (1.0 - 0.5 * (-TWO_PI).exp())).abs() < 1e-15);
        assert_eq!(zak_eval(&g1, 1.0, c(TWO_PI.exp()), 0.0), Err(Error::PoleHit));
    }

    #[test]
    fn generating_identity() {
        let g = RationalWindow::new(&[C64::new(1.0, 0.5), c(-0.7), c(0.2)], &[c(0.4), C64::new(0.9, 0.3), c(1.3)]).unwrap();
        let tab = multiplier_table(&g, 0.9).unwrap();
        for &(z, xi) in &[(C64::new(0.3, 0.2), 0.1), (C64::from_polar(1.0, 1.0), 0.7)] {
            let lhs = zak_terms(&tab, z, xi).unwrap() * tab.u().iter().map(|u| 1.0 - z * u).product::<C64>();
            let rhs = crate::linalg::poly_eval(&tab.string(xi), z);
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
            assert!(identity_residuals(&tab, z, xi).unwrap().r_gen < 1e-10);
        }
    }

    #[test]
    fn positivity_single_term() {
        let g = RationalWindow::real(&[1.0], &[-1.0]).unwrap();
        let cert = re_zak_certificate(&g, 1.0, (256, 64)).unwrap();
        assert!(cert.certified);
        assert!(cert.min_value - cert.lipschitz_slack > 0.0);
        // Oracle: Re 1/(1−ζ) ≥ 1/(1+|ζ|).
        assert!(cert.min_value >= 1.0 / (1.0 + (-TWO_PI).exp()) - 1e-12);
    }

    #[test]
    fn positivity_sign_flip() {
        let g = RationalWindow::real(&[1.0, -1.0], &[-1.0, -2.0]).unwrap();
        let cert = re_zak_certificate(&g, 1.0, (256, 128)).unwrap();
        assert!(!cert.certified);
        assert!(cert.min_value < 0.0);
    }

    #[test]
    fn positivity_mixed_rejected() {
        let g = RationalWindow::real(&[1.0, 1.0], &[-1.0, 2.0]).unwrap();
        assert_eq!(re_zak_certificate(&g, 1.0, (16, 16)), Err(Error::MixedHalfPlanes));
    }

    #[test]
    fn dominance_leading_term() {
        // a = [1, 0.5], w = [−1, −2]: beyond the threshold the w = −1 term decides.
        let g = RationalWindow::real(&[0.5, 1.0], &[-2.0, -1.0]).unwrap();
        let tab = multiplier_table(&g, 1.0).unwrap();
        let wts = term_weights(&tab);
        let lead = 1.0 / (1.0 + tab.u()[1].norm());
        let x = dominance_threshold(lead, 1, &wts, 1.0).unwrap();
        for xi in [x, x + 0.5, x + 3.0] {
            for i in 0..64 {
                let z = C64::from_polar(1.0, TWO_PI * i as f64 / 64.0);
                assert!(zak_terms(&tab, z, xi).unwrap().re > 0.0);
            }
        }
    }

    #[test]
    fn cosine_series_examples() {
        let g = RationalWindow::real(&[1.0], &[-1.0]).unwrap();
        let s = cosine_series_residual(&g, 1.0, 0.2, 0.7, 50).unwrap();
        assert!(s.residual <= s.tail_bound + 1e-15);
        let g2 = RationalWindow::real(&[1.0, -0.4], &[-0.3, -0.8]).unwrap();
        let s = cosine_series_residual(&g2, 0.9, 0.0, 0.0, 20).unwrap();
        assert!(s.residual <= s.tail_bound + 1e-14);
        let gp = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        assert_eq!(cosine_series_residual(&gp, 1.0, 0.0, 0.0, 5), Err(Error::DivergentSeries));
    }

    #[test]
    fn convexity_examples() {
        let g = RationalWindow::real(&[1.0], &[-1.0]).unwrap();
        assert_eq!(convexity_profile(&g).unwrap(), (true, true, true));
        let g = RationalWindow::real(&[1.0, -0.5], &[-1.0, -2.0]).unwrap();
        assert!(convexity_profile(&g).unwrap().0);
        let g = RationalWindow::real(&[-1.0], &[-1.0]).unwrap();
        assert!(!convexity_profile(&g).unwrap().0);
        let g = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        assert_eq!(convexity_profile(&g), Err(Error::NotRealProfile));
    }

    #[test]
    fn critical_single_term() {
        let g = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        let rep = critical_density_check(&g, &Lattice::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(rep.verdict, Verdict::FrameCertified);
        let Certificate::Critical(cert) = rep.certificate else { panic!() };
        // |𝒵| ≥ e^{2πξ}/(1+e^{2π}) ≥ 1/(1+e^{2π}) on ξ ∈ [0,1).
        assert!(cert.min_modulus >= 1.0 / (1.0 + TWO_PI.exp()) * (1.0 - 1e-9));
    }

    #[test]
    fn critical_synthetic_zero() {
        let w = [c(-0.3), c(-0.6)];
        let (z0, xi0) = (C64::from_polar(1.0, 2.0), 0.4);
        let a2 = synthetic_zero_coefficient(w, z0, xi0);
        let g = RationalWindow::new(&[c(1.0), a2], &w).unwrap();
        let rep = critical_density_check(&g, &Lattice::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(rep.verdict, Verdict::NotFrameWitnessed);
        let Certificate::Critical(cert) = rep.certificate else { panic!() };
        let (t, xi) = cert.zero.unwrap();
        assert!((xi - xi0).abs() < 1e-6);
        assert!((t - 2.0 / TWO_PI).abs() < 1e-6);
    }

    #[test]
    fn critical_requires_unit_density() {
        let g = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        assert!(matches!(
            critical_density_check(&g, &Lattice::new(0.5, 1.0).unwrap()),
            Err(Error::NotCritical { .. })
        ));
    }
}
