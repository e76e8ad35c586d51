//! Exponential polynomials `Σ c_k e^{λ_k ξ}`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Frequencies closer than this (relative) are merged.
const MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPoly {
    terms: Vec<(C64, C64)>,
}

impl ExpPoly {
    /// Build from `(coef, freq)` pairs, merging equal frequencies and dropping zero terms.
    pub fn new(terms: impl IntoIterator<Item = (C64, C64)>) -> Self {
        let mut out: Vec<(C64, C64)> = Vec::new();
        for (c, l) in terms {
            let tol = MERGE_TOL * l.norm().max(1.0);
            match out.iter_mut().find(|(_, m)| (m - l).norm() <= tol) {
                Some(t) => t.0 += c,
                None => out.push((c, l)),
            }
        }
        out.retain(|(c, _)| c.norm() != 0.0);
        ExpPoly { terms: out }
    }

    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(C64, C64)] {
        &self.terms
    }

    pub fn eval(&self, xi: f64) -> C64 {
        self.terms.iter().map(|(c, l)| c * (l * xi).exp()).sum()
    }

    /// `Σ |c_k e^{λ_k ξ}|`, the scale against which cancellation is measured.
    pub fn abs_terms(&self, xi: f64) -> f64 {
        self.terms.iter().map(|(c, l)| c.norm() * (l.re * xi).exp()).sum()
    }

    pub fn derivative(&self) -> Self {
        ExpPoly::new(self.terms.iter().map(|(c, l)| (c * l, *l)))
    }

    /// Upper bound for `|f|` on `[lo, hi]` by the triangle inequality.
    pub fn sup_bound(&self, lo: f64, hi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, l)| c.norm() * (l.re * lo).max(l.re * hi).exp())
            .sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        ExpPoly::new(self.terms.iter().map(|(c, l)| (c * s, *l)))
    }

    pub fn add(&self, other: &ExpPoly) -> Self {
        ExpPoly::new(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Certified lower bound of `|f|` on `[lo, hi]` from `n` cells.
///
/// On each cell the value is compared with the segment traced by the first-order
/// Taylor polynomial at the left node; the remainder is bounded by `h²/2 · sup|f''|`.
/// Returns the minimum over cells together with the cell where it is attained.
pub fn certified_min_modulus(f: &ExpPoly, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let h = (hi - lo) / n as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 0..n {
        let x0 = lo + i as f64 * h;
        let x1 = x0 + h;
        let v = f.eval(x0);
        let dv = d1.eval(x0);
        let seg = segment_distance(v, v + dv * h);
        let rem = 0.5 * h * h * d2.sup_bound(x0, x1);
        let bound = seg - rem;
        if bound < best.0 {
            best = (bound, x0);
        }
    }
    best
}

/// Distance from the origin to the segment `[p, q]` in the complex plane.
pub fn segment_distance(p: C64, q: C64) -> f64 {
    let d = q - p;
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return p.norm();
    }
    let t = (-(p.re * d.re + p.im * d.im) / dd).clamp(0.0, 1.0);
    (p + d * t).norm()
}
