//! Non-frame constructions: the `αβ = 1/(N−1)` family, rational densities, and the
//! degree-3 obstruction near `α = 6/7`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{null_vector, poly_eval, winding_number};
use crate::multipliers::{coeffs_from_u, elementary_coeffs, multiplier_table};
use crate::window::RationalWindow;
use crate::TWO_PI;

/// Center of the admissible α-neighborhood.
pub const OBSTRUCTION_ALPHA: f64 = 6.0 / 7.0;
/// Half-width of the admissible α-neighborhood.
pub const OBSTRUCTION_RANGE: f64 = 1e-3;
/// Default ξ₀ of the degree-3 construction.
pub const DEFAULT_XI0: f64 = 0.995;
const HOMOTOPY_STEP: f64 = 1e-4;

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Ascending coefficients of `z⁶·(equation)` at `α = 6/7`.
pub fn obstruction_polynomial() -> Vec<C64> {
    let e = std::f64::consts::E;
    let c6 = e - 1.0 / e;
    let c1 = (1.0f64 / 6.0).exp() - (-1.0f64 / 6.0).exp();
    let c0 = -e * e + 1.0 / (e * e) + (1.0f64 / 3.0).exp() - (-1.0f64 / 3.0).exp();
    let mut p = vec![cr(0.0); 13];
    p[0] = cr(c6);
    p[12] = cr(c6);
    p[5] = cr(-c1);
    p[7] = cr(-c1);
    p[6] = cr(c0);
    p
}

fn poly_derivative(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// All roots of an ascending polynomial: companion eigenvalues, then Newton polish.
pub fn polynomial_roots(p: &[C64]) -> Vec<C64> {
    let n = p.len() - 1;
    let lead = p[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -p[n - 1 - j] / lead
        } else if i == j + 1 {
            cr(1.0)
        } else {
            cr(0.0)
        }
    });
    let eig: Vec<C64> = comp.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    let dp = poly_derivative(p);
    eig.into_iter()
        .map(|mut z| {
            for _ in 0..50 {
                let d = poly_eval(&dp, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = poly_eval(p, z) / d;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Residual of the obstruction polynomial, relative to `Σ|cₖ||z|ᵏ`.
pub fn relative_residual(p: &[C64], z: C64) -> f64 {
    let scale: f64 = p.iter().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
    poly_eval(p, z).norm() / scale
}

/// `F_α(x)` with `x = 2πw₁`, `w₂ = 1/(2π)`, `w₃ = −1/(2π)` and `ε = 1/α − 1`.
pub fn obstruction_function(alpha: f64, x: C64) -> C64 {
    let eps = 1.0 / alpha - 1.0;
    let e = std::f64::consts::E;
    let (ep, em) = (eps.exp(), (-eps).exp());
    let c = e * e - 1.0 / (e * e) - ep * ep + em * em;
    x.exp() * (1.0 / e - e) - (-x).exp() * (e - 1.0 / e) - (x * eps).exp() * (em - ep) + (-x * eps).exp() * (ep - em) + c
}

fn obstruction_derivative(alpha: f64, x: C64) -> C64 {
    let eps = 1.0 / alpha - 1.0;
    let e = std::f64::consts::E;
    let (ep, em) = (eps.exp(), (-eps).exp());
    x.exp() * (1.0 / e - e) + (-x).exp() * (e - 1.0 / e) - (x * eps).exp() * eps * (em - ep)
        - (-x * eps).exp() * eps * (ep - em)
}

/// `w₁` from a root `z = e^{ε2πw₁}` (principal logarithm).
pub fn pole_from_root(z: C64, alpha: f64) -> C64 {
    let eps = 1.0 / alpha - 1.0;
    z.ln() / (TWO_PI * eps)
}

fn newton_obstruction(alpha: f64, mut x: C64) -> Option<C64> {
    for _ in 0..60 {
        let d = obstruction_derivative(alpha, x);
        if d.norm() == 0.0 {
            return None;
        }
        let step = obstruction_function(alpha, x) / d;
        x -= step;
        if step.norm() <= 1e-15 * x.norm().max(1.0) {
            return Some(x);
        }
    }
    (obstruction_function(alpha, x).norm() < 1e-10).then_some(x)
}

/// Exactly one zero of `F_α` within `r` of `x`.
fn isolated(alpha: f64, x: C64, r: f64) -> bool {
    winding_number(|v| obstruction_function(alpha, v), x, r).is_some_and(|w| (w - 1.0).abs() < 0.01)
}

/// Track a root of `F_α` from `α = 6/7` to `target`.
fn continue_root(x0: C64, target: f64) -> Result<C64> {
    let mut alpha = OBSTRUCTION_ALPHA;
    let mut x = x0;
    let mut step = HOMOTOPY_STEP.copysign(target - alpha);
    while (target - alpha).abs() > 0.0 {
        if (target - alpha).abs() < step.abs() {
            step = target - alpha;
        }
        let next = alpha + step;
        match newton_obstruction(next, x) {
            Some(y) if (y - x).norm() < 0.05 && isolated(next, y, 0.05) => {
                alpha = next;
                x = y;
            }
            _ => {
                step *= 0.5;
                if step.abs() < 1e-12 {
                    return Err(Error::ContinuationLost { alpha: next });
                }
            }
        }
    }
    Ok(x)
}

/// Roots `z = e^{ε2πw₁}` of the obstruction equation, sorted by `(Re, Im)`.
pub fn obstruction_roots(alpha: f64) -> Result<Vec<C64>> {
    if (alpha - OBSTRUCTION_ALPHA).abs() >= OBSTRUCTION_RANGE {
        return Err(Error::ObstructionRange { alpha });
    }
    let mut roots = polynomial_roots(&obstruction_polynomial());
    if alpha != OBSTRUCTION_ALPHA {
        let eps0 = 1.0 / OBSTRUCTION_ALPHA - 1.0;
        let eps = 1.0 / alpha - 1.0;
        roots = roots
            .into_iter()
            .map(|z| continue_root(z.ln() / eps0, alpha).map(|x| (x * eps).exp()))
            .collect::<Result<_>>()?;
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Index of the root closest to `target`.
pub fn branch_near(roots: &[C64], target: C64) -> usize {
    roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction3 {
    pub alpha: f64,
    pub window: RationalWindow,
    pub xi0: f64,
    #[serde(with = "complex_vec")]
    pub roots_z: Vec<C64>,
    pub branch: usize,
    /// `|m₀(ξ₀−2/α+2)|, |m₁(ξ₀−1/α+1)|, |m₂(ξ₀)|` relative to their term sums.
    pub residuals: [f64; 3],
    /// Singular values of the condition matrix, descending.
    pub singular_values: Vec<f64>,
}

mod complex_vec {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl Obstruction3 {
    /// Center `ξ₀ − 2/α` of the witness probes.
    pub fn witness_center(&self) -> f64 {
        self.xi0 - 2.0 / self.alpha
    }
}

/// Evaluation points of the three vanishing conditions.
pub fn condition_points(alpha: f64, xi0: f64) -> [f64; 3] {
    [xi0 - 2.0 / alpha + 2.0, xi0 - 1.0 / alpha + 1.0, xi0]
}

/// Rows `s`, columns `k`: `e^{2πwₖ p_s}·A_{k,s}`.
pub fn condition_matrix(w: &[C64; 3], alpha: f64, xi0: f64) -> Result<DMatrix<C64>> {
    // Validates the poles; coefficients follow the caller's ordering.
    RationalWindow::new(&[cr(1.0); 3], w)?;
    let u: Vec<C64> = w.iter().map(|w| (w * TWO_PI / alpha).exp()).collect();
    let coeffs = coeffs_from_u(&u);
    let pts = condition_points(alpha, xi0);
    Ok(DMatrix::from_fn(3, 3, |s, k| (w[k] * TWO_PI * pts[s]).exp() * coeffs[k][s]))
}

pub fn degree3_window(alpha: f64, branch: usize, xi0: f64) -> Result<Obstruction3> {
    let roots = obstruction_roots(alpha)?;
    let z = *roots.get(branch).ok_or_else(|| Error::Input(format!("branch {branch} out of range")))?;
    let w = [pole_from_root(z, alpha), cr(1.0 / TWO_PI), cr(-1.0 / TWO_PI)];
    let m = condition_matrix(&w, alpha, xi0)?;
    let (a, sv) = null_vector(&m);
    let rel = sv[2] / sv[0];
    if rel > 1e-9 {
        return Err(Error::NullspaceRankMismatch { rank: 3, expected: 2 });
    }
    if sv[1] / sv[0] < 1e-9 {
        return Err(Error::NullspaceRankMismatch { rank: 1, expected: 2 });
    }
    let window = RationalWindow::new(&a, &w)?;
    let tab = multiplier_table(&window, alpha)?;
    let pts = condition_points(alpha, xi0);
    let mut residuals = [0.0; 3];
    for s in 0..3 {
        let scale = tab.m(s).abs_terms(pts[s]);
        residuals[s] = tab.m(s).eval(pts[s]).norm() / scale;
    }
    Ok(Obstruction3 { alpha, window, xi0, roots_z: roots, branch, residuals, singular_values: sv })
}

/// Result of a homogeneous-condition construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonFrameWindow {
    pub window: RationalWindow,
    pub alpha: f64,
    pub theta: f64,
    /// Points `y` with `Σ_s m_s(y) = 0`.
    pub points: Vec<f64>,
    /// `|Σ_s m_s(y)|` relative to its term sum, per point.
    pub residuals: Vec<f64>,
}

/// Window with `Σ_s m_s(y) = 0` at every row value of `L_θ`, for `α = p/q`.
///
/// The row values form `q` points `θ₀ + m/p`; the construction needs `N ≥ q + 1`.
pub fn rational_nonframe_window(w: &[C64], p: u32, q: u32, theta: f64) -> Result<NonFrameWindow> {
    let n = w.len();
    if p == 0 || q == 0 || n < q as usize + 1 {
        return Err(Error::Input(format!("need at least q+1 = {} poles", q + 1)));
    }
    let alpha = p as f64 / q as f64;
    let probe = RationalWindow::new(&vec![cr(1.0); n], w)?;
    if !probe.class().distinct_re {
        return Err(Error::DegenerateRe);
    }
    let coeffs = elementary_coeffs(&probe, alpha)?;
    let wv = probe.w().to_vec();
    let sums: Vec<C64> = coeffs.iter().map(|row| row.iter().sum()).collect();
    let base = theta.rem_euclid(1.0 / p as f64);
    for attempt in 0..8 {
        let theta0 = (base + 0.1 * attempt as f64 / p as f64).rem_euclid(1.0 / p as f64);
        let points: Vec<f64> = (0..q).map(|m| theta0 + m as f64 / p as f64).collect();
        let mat = DMatrix::from_fn(q as usize, n, |r, k| (wv[k] * TWO_PI * points[r]).exp() * sums[k]);
        let (a, sv) = null_vector(&mat);
        let rank_ok = sv[q as usize - 1] > 1e-10 * sv[0];
        if !rank_ok {
            continue;
        }
        let window = RationalWindow::new(&a, &wv)?;
        let tab = multiplier_table(&window, alpha)?;
        let residuals = points
            .iter()
            .map(|&y| {
                let total: C64 = (0..n).map(|s| tab.m(s).eval(y)).sum();
                let scale: f64 = (0..n).map(|s| tab.m(s).abs_terms(y)).sum();
                total.norm() / scale
            })
            .collect();
        return Ok(NonFrameWindow { window, alpha, theta: theta0, points, residuals });
    }
    Err(Error::RankDeficient)
}

/// The `α = 1/(N−1)` construction at `θ` (default `N − 1 + 0.25`).
pub fn nfprop_window(w: &[C64], theta: Option<f64>) -> Result<NonFrameWindow> {
    let n = w.len();
    if n < 2 {
        return Err(Error::Input("need N >= 2".into()));
    }
    let theta = theta.unwrap_or(n as f64 - 1.0 + 0.25);
    rational_nonframe_window(w, 1, n as u32 - 1, theta)
}
