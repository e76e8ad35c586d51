//! Multiplier strings `M(ξ) = (m₀, …, m_{N−1})` and their algebraic identities.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::window::RationalWindow;
use crate::TWO_PI;

/// Largest exponent (natural log scale) accepted before reporting overflow.
pub const EXP_GUARD: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierTable {
    alpha: f64,
    a: Vec<C64>,
    w: Vec<C64>,
    u: Vec<C64>,
    /// `coeffs[k][s] = A_{k,s}`.
    coeffs: Vec<Vec<C64>>,
    m: Vec<ExpPoly>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 + 1e-12) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    Ok(())
}

fn check_exponents(w: &[C64], alpha: f64) -> Result<()> {
    let mut up = 0.0;
    let mut down = 0.0;
    for wk in w {
        let e = TWO_PI * wk.re / alpha;
        if e.abs() > EXP_GUARD {
            return Err(Error::Overflow { exponent: e });
        }
        if e > 0.0 {
            up += e;
        } else {
            down -= e;
        }
    }
    // Products of up to N−1 of the u's must stay representable too.
    if up > EXP_GUARD || down > EXP_GUARD {
        return Err(Error::Overflow { exponent: up.max(down) });
    }
    Ok(())
}

/// `uₖ = e^{2π wₖ/α'}`.
pub fn u_values(g: &RationalWindow, alpha: f64) -> Vec<C64> {
    g.w().iter().map(|w| (w * (TWO_PI / alpha)).exp()).collect()
}

/// Coefficients of `Π_{j≠k}(1 − z u_j)`, i.e. `A_{k,s} = (−1)^s e_s(u_j : j ≠ k)`.
pub fn elementary_coeffs(g: &RationalWindow, alpha: f64) -> Result<Vec<Vec<C64>>> {
    check_alpha(alpha)?;
    check_exponents(g.w(), alpha)?;
    let u = u_values(g, alpha);
    Ok(coeffs_from_u(&u))
}

pub(crate) fn coeffs_from_u(u: &[C64]) -> Vec<Vec<C64>> {
    let n = u.len();
    (0..n)
        .map(|k| {
            let mut p = vec![C64::new(0.0, 0.0); n];
            p[0] = C64::new(1.0, 0.0);
            let mut deg = 0;
            for (j, uj) in u.iter().enumerate() {
                if j == k {
                    continue;
                }
                deg += 1;
                for s in (1..=deg).rev() {
                    let prev = p[s - 1];
                    p[s] -= uj * prev;
                }
            }
            p
        })
        .collect()
}

pub fn multiplier_table(g: &RationalWindow, alpha: f64) -> Result<MultiplierTable> {
    let coeffs = elementary_coeffs(g, alpha)?;
    let u = u_values(g, alpha);
    let n = g.len();
    let m = (0..n)
        .map(|s| {
            ExpPoly::new(
                g.a().iter()
                    .zip(g.w())
                    .zip(&coeffs)
                    .map(|((a, w), row)| (a * row[s], w * TWO_PI)),
            )
        })
        .collect();
    Ok(MultiplierTable {
        alpha,
        a: g.a().to_vec(),
        w: g.w().to_vec(),
        u,
        coeffs,
        m,
    })
}

impl MultiplierTable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn u(&self) -> &[C64] {
        &self.u
    }

    pub fn w(&self) -> &[C64] {
        &self.w
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    /// `A_{k,s}`.
    pub fn coeff(&self, k: usize, s: usize) -> C64 {
        self.coeffs[k][s]
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn m(&self, s: usize) -> &ExpPoly {
        &self.m[s]
    }

    /// `aₖ e^{2πξwₖ}` for every k.
    pub fn kernel_terms(&self, xi: f64) -> Vec<C64> {
        self.a
            .iter()
            .zip(&self.w)
            .map(|(a, w)| a * (w * (TWO_PI * xi)).exp())
            .collect()
    }

    /// The string `M(ξ)`.
    pub fn string(&self, xi: f64) -> Vec<C64> {
        let e = self.kernel_terms(xi);
        let n = self.n();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (ek, row) in e.iter().zip(&self.coeffs) {
            for s in 0..n {
                out[s] += ek * row[s];
            }
        }
        out
    }

    /// Magnitude scale of `m_s(ξ)`: `Σₖ |aₖ A_{k,s} e^{2πξwₖ}|`.
    pub fn string_scale(&self, xi: f64) -> Vec<f64> {
        let e = self.kernel_terms(xi);
        (0..self.n())
            .map(|s| e.iter().zip(&self.coeffs).map(|(ek, row)| (ek * row[s]).norm()).sum())
            .collect()
    }
}

/// Residuals of the generating and residue identities, both relative to term magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResiduals {
    pub r_gen: f64,
    pub r_res: Vec<f64>,
}

/// Checks `Σ m_s zˢ / Π(1 − z uₖ) = Σ aₖe^{2πξwₖ}/(1 − z uₖ)` and
/// `Σ m_s u_j^{−s} = a_j u_j^{1−N} e^{2πξw_j} Π_{l≠j}(u_j − u_l)`.
pub fn identity_residuals(tab: &MultiplierTable, z: C64, xi: f64) -> Result<IdentityResiduals> {
    let one = C64::new(1.0, 0.0);
    for u in tab.u() {
        if (one - z * u).norm() < 1e-14 {
            return Err(Error::PoleHit);
        }
    }
    let n = tab.n();
    let e = tab.kernel_terms(xi);
    let m = tab.string(xi);
    let u = tab.u();

    let horner = |x: C64| m.iter().rev().fold(C64::new(0.0, 0.0), |acc, ms| acc * x + ms);
    let prod: C64 = u.iter().map(|uk| one - z * uk).product();
    let lhs = horner(z) / prod;
    let rhs: C64 = e.iter().zip(u).map(|(ek, uk)| ek / (one - z * uk)).sum();
    let gen_scale: f64 = (0..n)
        .map(|k| {
            e[k].norm()
                * (0..n)
                    .filter(|&j| j != k)
                    .map(|j| 1.0 + z.norm() * u[j].norm())
                    .product::<f64>()
        })
        .sum::<f64>()
        / prod.norm();
    let r_gen = (lhs - rhs).norm() / gen_scale.max(f64::MIN_POSITIVE);

    let r_res = (0..n)
        .map(|j| {
            let x = one / u[j];
            let lhs = horner(x);
            let mut rhs = e[j] * u[j].powi(1 - n as i32);
            for l in 0..n {
                if l != j {
                    rhs *= u[j] - u[l];
                }
            }
            let scale: f64 = (0..n)
                .map(|k| {
                    e[k].norm()
                        * (0..n)
                            .filter(|&l| l != k)
                            .map(|l| 1.0 + u[l].norm() / u[j].norm())
                            .product::<f64>()
                })
                .sum();
            (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(IdentityResiduals { r_gen, r_res })
}

/// Bounds `pmin ≤ |Π(1 − z uₖ)|/Π max(1,|uₖ|) ≤ pmax` on `|z| = 1`.
pub fn criterion_constants(g: &RationalWindow, alpha: f64) -> (f64, f64) {
    let mut pmin = 1.0;
    let mut pmax = 1.0;
    for w in g.w() {
        let rho = (-TWO_PI * w.re.abs() / alpha).exp();
        pmin *= 1.0 - rho;
        pmax *= 1.0 + rho;
    }
    (pmin, pmax)
}
