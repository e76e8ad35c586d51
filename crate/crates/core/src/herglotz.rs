//! Frame certification for Herglotz windows by Frobenius-matrix contraction.
//!
//! For a Herglotz window the roots of `p_ξ(z) = Σ m_s(ξ) zˢ / m_{N−1}(ξ)` interlace
//! the nodes `μₖ = e^{−2πwₖ/α'}`. On that polynomial family the transposed
//! companion matrices contract the weighted norm `‖q‖_μ = Σ |νₖ q(μₖ)|` by `μ₁`,
//! which bounds every product of companion matrices and yields a left inverse of
//! the criterion operator.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::certified_min_modulus;
use crate::linalg::{poly_eval, spectral_norm};
use crate::multipliers::{criterion_constants, multiplier_table, MultiplierTable};
use crate::oracle::upper_bound_estimate;
use crate::report::{Certificate, CertificationReport, Method, Verdict};
use crate::window::{rescale_to_unit_beta, Lattice, RationalWindow};
use crate::TWO_PI;

/// Relative node gap below which the norm constant is considered degenerate.
pub const GAP_TOL: f64 = 1e-10;
/// Division guard for the leading multiplier.
pub const TOL_DIV: f64 = 1e-300;
/// Running products below this norm end the series.
pub const SERIES_CUTOFF: f64 = 1e-12;
/// Grid on `[0, 1)` for the series constant.
pub const SERIES_GRID: usize = 512;

/// Companion matrix of a monic polynomial given by ascending coefficients
/// `(b₀, …, b_{n−1}, 1)`: first row `(−b_{n−1}, …, −b₀)`, ones below the diagonal.
pub fn frobenius_matrix<T: ComplexField + Copy>(monic: &[T]) -> Result<DMatrix<T>> {
    let n = monic.len().checked_sub(1).ok_or(Error::NotMonic)?;
    let lead = monic[n];
    if (lead - T::one()).modulus() > nalgebra::convert::<f64, T::RealField>(1e-12) {
        return Err(Error::NotMonic);
    }
    let mut f = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        f[(0, j)] = -monic[n - 1 - j];
    }
    for i in 1..n {
        f[(i, i - 1)] = T::one();
    }
    Ok(f)
}

/// Monic ascending coefficients of `p_ξ`; `b_j = m_j(ξ)/m_{N−1}(ξ)`.
pub fn pxi_polynomial(tab: &MultiplierTable, xi: f64) -> Result<Vec<C64>> {
    let m = tab.string(xi);
    let lead = *m.last().expect("N >= 1");
    if lead.norm() <= TOL_DIV {
        return Err(Error::LeadingVanishes { xi });
    }
    Ok(m.iter().map(|x| x / lead).collect())
}

/// Nodes `1 > μ₁ > … > μ_{n+1} > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingSpec {
    mu: Vec<f64>,
}

impl InterlacingSpec {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Input("interlacing spec needs at least one node".into()));
        }
        if mu.iter().any(|&m| !(m > 0.0 && m < 1.0)) {
            return Err(Error::Input("nodes must lie in (0, 1)".into()));
        }
        if mu.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::Input("nodes must be strictly decreasing".into()));
        }
        Ok(InterlacingSpec { mu })
    }

    /// `μₖ = e^{−2πwₖ/α'}` for a Herglotz window (ascending `w`).
    pub fn from_window(g: &RationalWindow, alpha: f64) -> Result<Self> {
        if !g.class().herglotz {
            return Err(Error::NotHerglotz);
        }
        Self::new(g.w().iter().map(|w| (-TWO_PI * w.re / alpha).exp()).collect())
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Degree bound `n`; polynomials live in `𝒫_{n−1}`.
    pub fn n(&self) -> usize {
        self.mu.len() - 1
    }
}

/// The norm `‖q‖_μ = Σ |νₖ q(μₖ)|` on polynomials of degree `< n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionNorm {
    spec: InterlacingSpec,
    nu: Vec<f64>,
    /// Factor removed from the closed-form weights (`ν = raw/scale`).
    scale: f64,
}

pub fn contraction_norm(spec: &InterlacingSpec) -> Result<ContractionNorm> {
    let mu = spec.mu();
    let top = mu[0];
    if let Some(gap) = mu.windows(2).map(|p| (p[0] - p[1]) / top).reduce(f64::min) {
        if gap < GAP_TOL {
            return Err(Error::NearDegenerate { gap });
        }
    }
    // Work with nodes scaled by μ₁ so that tiny nodes do not underflow the products.
    let raw: Vec<f64> = (0..mu.len())
        .map(|k| {
            1.0 / (0..mu.len())
                .filter(|&l| l != k)
                .map(|l| (mu[k] - mu[l]) / top)
                .product::<f64>()
        })
        .collect();
    let scale = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let nu = raw.iter().map(|x| x / scale).collect();
    let n = mu.len().saturating_sub(1) as i32;
    Ok(ContractionNorm { spec: spec.clone(), nu, scale: scale * top.powi(-n) })
}

impl ContractionNorm {
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn spec(&self) -> &InterlacingSpec {
        &self.spec
    }

    /// Closed-form weights before rescaling, `1/Π_{l≠k}(μₖ − μ_l)`.
    pub fn raw_nu(&self) -> Vec<f64> {
        self.nu.iter().map(|x| x * self.scale).collect()
    }

    /// `‖q‖_μ` for ascending coefficients `q`.
    pub fn norm(&self, q: &[f64]) -> f64 {
        self.spec
            .mu
            .iter()
            .zip(&self.nu)
            .map(|(m, v)| (v * real_poly_eval(q, *m)).abs())
            .sum()
    }

    /// `‖q‖_μ` for complex ascending coefficients.
    pub fn norm_complex(&self, q: &[C64]) -> f64 {
        self.spec
            .mu
            .iter()
            .zip(&self.nu)
            .map(|(m, v)| (poly_eval(q, C64::new(*m, 0.0)) * *v).norm())
            .sum()
    }

    /// Weighted evaluation matrix `diag(ν)·V`, `V_{k,j} = μₖʲ`.
    fn weighted_vandermonde(&self) -> DMatrix<f64> {
        let n = self.spec.n();
        let mu = &self.spec.mu;
        DMatrix::from_fn(mu.len(), n, |k, j| self.nu[k] * mu[k].powi(j as i32))
    }

    /// `(c₁, c₂)` with `c₁‖v‖₂ ≤ ‖v‖_μ ≤ c₂‖v‖₂` on coefficient vectors.
    pub fn euclid_equivalence(&self) -> (f64, f64) {
        let n = self.spec.n();
        if n == 0 {
            return (1.0, 1.0);
        }
        let sv = self.weighted_vandermonde().svd(false, false).singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        (smin, ((n + 1) as f64).sqrt() * smax)
    }

    /// `C` with `‖F(p₁)⋯F(p_m)‖₂ ≤ C μ₁^m` for interlacing `pᵢ`.
    pub fn product_constant(&self) -> f64 {
        let (c1, c2) = self.euclid_equivalence();
        c2 / c1
    }

    /// Monic ascending coefficients of `p_l(x) = Π_{k≠l}(x − μₖ)` (`l` is 0-based).
    pub fn vertex_poly(&self, l: usize) -> Vec<f64> {
        let roots: Vec<f64> = self
            .spec
            .mu
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != l)
            .map(|(_, m)| *m)
            .collect();
        poly_from_roots(&roots)
    }
}

fn real_poly_eval(q: &[f64], x: f64) -> f64 {
    q.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Monic ascending coefficients of `Π (x − rₖ)`.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (j, c) in p.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= r * c;
        }
        p = next;
    }
    p
}

/// `z·q mod p` for monic `p` of degree `n` and `deg q < n` (ascending coefficients).
pub fn shift_mod(q: &[f64], p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    let mut zq = vec![0.0; n + 1];
    for (j, c) in q.iter().enumerate().take(n) {
        zq[j + 1] = *c;
    }
    let lead = zq[n];
    (0..n).map(|j| zq[j] - lead * p[j]).collect()
}

/// `(‖z·q mod p_l‖_μ, μ₁‖q‖_μ)`; the first never exceeds the second.
pub fn verify_contraction(cn: &ContractionNorm, l: usize, q: &[f64]) -> (f64, f64) {
    let p = cn.vertex_poly(l);
    let r = shift_mod(q, &p);
    (cn.norm(&r), cn.spec.mu[0] * cn.norm(q))
}

/// Weights `c_l = p(μ_l)/p_l(μ_l)` expressing `F(p)ᵀ = Σ c_l F(p_l)ᵀ`.
pub fn convex_coefficients(cn: &ContractionNorm, p: &[f64]) -> Vec<f64> {
    let mu = &cn.spec.mu;
    (0..mu.len())
        .map(|l| real_poly_eval(p, mu[l]) / real_poly_eval(&cn.vertex_poly(l), mu[l]))
        .collect()
}

/// Payload of a Herglotz certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzCertificate {
    /// Contraction factor `c = μ₁`.
    pub c: f64,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    /// `(c₁, c₂)` with `c₁‖v‖₂ ≤ ‖v‖_μ ≤ c₂‖v‖₂`.
    pub norm_equivalence: (f64, f64),
    pub product_constant: f64,
    /// `sup_ξ Σ_s ‖Π_{j<s} F(p_{{ξ−j/α'}})‖₂`.
    pub c_sigma: f64,
    /// Certified lower bound of `|m_{N−1}|` on `[0, 1]`.
    pub min_leading: f64,
    pub grid: usize,
    pub max_series_len: usize,
    pub interlacing_verified: bool,
    pub pmin: f64,
    pub pmax: f64,
    /// `A_crit·(pmin/pmax)²`.
    pub a_crit_scaled: f64,
}

/// `Σ_s ‖Π_{j<s} F(p_{{ξ − j/α'}})‖₂` with geometric tail; returns the sum and the
/// number of terms evaluated.
fn series_at(tab: &MultiplierTable, xi: f64, tail_factor: f64, cap: usize) -> Result<(f64, usize)> {
    let alpha = tab.alpha();
    let n = tab.n() - 1;
    let mut prod = DMatrix::<C64>::identity(n, n);
    let mut sum = 1.0;
    for s in 1..=cap {
        let x = (xi - (s - 1) as f64 / alpha).rem_euclid(1.0);
        let f = frobenius_matrix(&pxi_polynomial(tab, x)?)?;
        prod = prod * f;
        let nrm = spectral_norm(&prod);
        sum += nrm;
        if nrm < SERIES_CUTOFF {
            return Ok((sum + nrm * tail_factor, s));
        }
    }
    Err(Error::ConfigLimit(format!("series did not reach {SERIES_CUTOFF:e} in {cap} terms")))
}

/// Sign alternation of `Σ m_s(ξ) zˢ` at the nodes.
fn interlaces(tab: &MultiplierTable, spec: &InterlacingSpec, xi: f64) -> bool {
    let m = tab.string(xi);
    let vals: Vec<f64> = spec
        .mu()
        .iter()
        .map(|&x| poly_eval(&m, C64::new(x, 0.0)).re)
        .collect();
    vals.windows(2).all(|p| p[0] * p[1] < 0.0)
}

pub fn certify_herglotz(g: &RationalWindow, lat: &Lattice) -> Result<CertificationReport> {
    if !g.class().herglotz {
        return Err(Error::NotHerglotz);
    }
    let density = lat.normalized_alpha();
    if density > 1.0 + 1e-12 {
        return Err(Error::DensityTooLow { density });
    }
    let (h, alpha) = rescale_to_unit_beta(g, lat);
    let alpha = alpha.min(1.0);
    let tab = multiplier_table(&h, alpha)?;
    let spec = InterlacingSpec::from_window(&h, alpha)?;
    let cn = contraction_norm(&spec)?;
    let mu1 = spec.mu()[0];
    let n = tab.n() - 1;

    let lead_poly = tab.m(n);
    let (min_leading, _) = certified_min_modulus(lead_poly, 0.0, 1.0, 8 * SERIES_GRID);
    if min_leading <= 0.0 {
        return Err(Error::LeadingVanishes { xi: 0.0 });
    }

    let product_constant = cn.product_constant();
    let (c_sigma, max_len, interlacing_verified) = if n == 0 {
        (1.0, 0, true)
    } else {
        let tail = product_constant * mu1 / (1.0 - mu1);
        let cap = (200.0 + 40.0 / (1.0 - mu1)) as usize;
        let per: Vec<Result<(f64, usize)>> = (0..SERIES_GRID)
            .into_par_iter()
            .map(|i| series_at(&tab, i as f64 / SERIES_GRID as f64, tail, cap))
            .collect();
        let mut c_sigma: f64 = 0.0;
        let mut max_len = 0;
        for r in per {
            let (v, len) = r?;
            c_sigma = c_sigma.max(v);
            max_len = max_len.max(len);
        }
        let inter = (0..100).all(|i| interlaces(&tab, &spec, i as f64 / 100.0));
        (c_sigma, max_len, inter)
    };

    let a_crit = (min_leading / c_sigma).powi(2);
    let (pmin, pmax) = criterion_constants(&h, alpha);
    let b_crit = upper_bound_estimate(&tab);
    let (c1, c2) = cn.euclid_equivalence();
    let cert = HerglotzCertificate {
        c: mu1,
        mu: spec.mu().to_vec(),
        nu: cn.nu().to_vec(),
        norm_equivalence: (c1, c2),
        product_constant,
        c_sigma,
        min_leading,
        grid: SERIES_GRID,
        max_series_len: max_len,
        interlacing_verified,
        pmin,
        pmax,
        a_crit_scaled: a_crit * (pmin / pmax).powi(2),
    };
    let verdict = if interlacing_verified {
        Verdict::FrameCertified
    } else {
        Verdict::Inconclusive
    };
    let mut rep = CertificationReport::new(verdict, Method::Herglotz, Certificate::Herglotz(cert));
    rep.a_crit = Some(a_crit);
    rep.b_crit = Some(b_crit);
    rep.diag("bound", "criterion operator");
    Ok(rep)
}

/// Action of `F(p)ᵀ` on ascending coefficients, i.e. `q ↦ z·q mod p`.
pub fn companion_transpose_apply(p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    let f = frobenius_matrix(p)?;
    let n = q.len();
    // F(p)ᵀ acts on the descending vector (α_{n−1}, …, α₀).
    let desc = DVector::from_iterator(n, q.iter().rev().copied());
    let out = f.transpose() * desc;
    Ok(out.iter().rev().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_examples() {
        let f = frobenius_matrix(&[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(f, DMatrix::from_row_slice(2, 2, &[-2.0, -3.0, 1.0, 0.0]));
        let f = frobenius_matrix(&[-0.4, 1.0]).unwrap();
        assert_eq!(f[(0, 0)], 0.4);
        let f = frobenius_matrix(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((&f * &f * &f).iter().all(|x| *x == 0.0));
        assert_eq!(frobenius_matrix(&[1.0, 2.0]), Err(Error::NotMonic));
    }

    #[test]
    fn characteristic_polynomial_matches() {
        // det(zI − F) = p(z) checked at sample points for n ≤ 4.
        let ps: [&[f64]; 3] = [&[0.3, -1.2, 1.0], &[0.1, 0.5, -0.7, 1.0], &[2.0, -0.1, 0.3, 0.9, 1.0]];
        for p in ps {
            let f = frobenius_matrix(p).unwrap();
            let n = f.nrows();
            for &z in &[0.37, -1.4, 2.2] {
                let d = (DMatrix::<f64>::identity(n, n) * z - &f).determinant();
                assert!((d - real_poly_eval(p, z)).abs() < 1e-12 * d.abs().max(1.0));
            }
        }
    }

    #[test]
    fn transpose_is_shift_mod() {
        let p = [0.2, -0.3, 0.5, 1.0];
        let q = [1.0, -2.0, 0.5];
        let a = companion_transpose_apply(&p, &q).unwrap();
        let b = shift_mod(&q, &p);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_examples() {
        let spec = InterlacingSpec::new(vec![0.75, 0.5, 0.25]).unwrap();
        let cn = contraction_norm(&spec).unwrap();
        let raw = cn.raw_nu();
        let want = [8.0, -16.0, 8.0];
        for (r, w) in raw.iter().zip(&want) {
            assert!((r - w).abs() < 1e-12);
        }
        assert_eq!(cn.nu(), &[0.5, -1.0, 0.5]);
        let raw_norm = |q: &[f64]| cn.norm(q) * cn.scale;
        assert!((raw_norm(&[1.0]) - 32.0).abs() < 1e-12);
        let (lhs, rhs) = verify_contraction(&cn, 1, &[1.0]);
        assert!((lhs * cn.scale - 16.0).abs() < 1e-12 && (rhs * cn.scale - 24.0).abs() < 1e-12);
        assert_eq!(verify_contraction(&cn, 0, &[0.0, 0.0]), (0.0, 0.0));
        let spec = InterlacingSpec::new(vec![0.6, 0.3]).unwrap();
        let cn = contraction_norm(&spec).unwrap();
        assert_eq!(cn.nu(), &[1.0, -1.0]);
    }

    #[test]
    fn degenerate_gap() {
        let spec = InterlacingSpec::new(vec![0.5, 0.5 - 1e-12]).unwrap();
        assert!(matches!(contraction_norm(&spec), Err(Error::NearDegenerate { .. })));
        assert!(InterlacingSpec::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn pxi_example() {
        let g = RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let tab = multiplier_table(&g, 1.0).unwrap();
        let p = pxi_polynomial(&tab, 0.0).unwrap();
        let want = 2.0 / (-(2.0 * TWO_PI).exp() - TWO_PI.exp());
        assert!((p[0].re - want).abs() < 1e-12 * want.abs());
        assert_eq!(p[1], C64::new(1.0, 0.0));
        let g = RationalWindow::real(&[2.0], &[1.0]).unwrap();
        let tab = multiplier_table(&g, 1.0).unwrap();
        assert_eq!(pxi_polynomial(&tab, 0.3).unwrap().len(), 1);
    }

    #[test]
    fn certify_examples() {
        let g = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        let rep = certify_herglotz(&g, &Lattice::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(rep.verdict, Verdict::FrameCertified);
        let a = rep.a_crit.unwrap();
        assert!(a <= 1.0 && a > 0.99, "{a}");
        let g = RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let rep = certify_herglotz(&g, &Lattice::new(0.7, 1.0).unwrap()).unwrap();
        assert_eq!(rep.verdict, Verdict::FrameCertified);
        match &rep.certificate {
            Certificate::Herglotz(c) => assert!(c.c_sigma.is_finite() && c.c_sigma >= 1.0),
            _ => panic!("wrong certificate"),
        }
        let g = RationalWindow::real(&[1.0, -1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(
            certify_herglotz(&g, &Lattice::new(0.7, 1.0).unwrap()),
            Err(Error::NotHerglotz)
        );
        let g = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        assert!(matches!(
            certify_herglotz(&g, &Lattice::new(2.0, 1.0).unwrap()),
            Err(Error::DensityTooLow { .. })
        ));
    }
}
