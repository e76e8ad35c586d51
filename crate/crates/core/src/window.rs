//! Rational windows `g(t) = Σ a_k / (t − i w_k)` and lattice parameters.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TWO_PI;

/// Poles with `|Re w| < TOL_POLE` are treated as real.
pub const TOL_POLE: f64 = 1e-12;
/// Two poles closer than this in both coordinates are the same pole.
pub const TOL_DUPLICATE: f64 = 1e-12;

/// Summary flags of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowClass {
    pub herglotz: bool,
    pub all_re_neg: bool,
    pub all_re_pos: bool,
    pub distinct_re: bool,
    pub zero_sum: bool,
}

/// A validated window, stored sorted ascending by `Re w` (ties by `Im w`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow", into = "RawWindow")]
pub struct RationalWindow {
    a: Vec<C64>,
    w: Vec<C64>,
    class: WindowClass,
}

/// Unvalidated form used by the window file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawWindow {
    pub a: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
}

impl TryFrom<RawWindow> for RationalWindow {
    type Error = Error;
    fn try_from(raw: RawWindow) -> Result<Self> {
        let a = raw.a.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>();
        let w = raw.w.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>();
        validate_window(&a, &w)
    }
}

impl From<RationalWindow> for RawWindow {
    fn from(g: RationalWindow) -> Self {
        RawWindow {
            a: g.a.iter().map(|c| [c.re, c.im]).collect(),
            w: g.w.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// Validate and sort a window.
pub fn validate_window(a: &[C64], w: &[C64]) -> Result<RationalWindow> {
    if a.len() != w.len() {
        return Err(Error::LengthMismatch { a: a.len(), w: w.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyWindow);
    }
    for (k, (ak, wk)) in a.iter().zip(w).enumerate() {
        if !(ak.re.is_finite() && ak.im.is_finite() && wk.re.is_finite() && wk.im.is_finite()) {
            return Err(Error::Input(format!("non-finite entry at index {k}")));
        }
        if ak.norm() == 0.0 {
            return Err(Error::ZeroCoefficient { index: k });
        }
        if wk.re.abs() < TOL_POLE {
            return Err(Error::RealPole { index: k });
        }
    }
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if (w[i].re - w[j].re).abs() < TOL_DUPLICATE && (w[i].im - w[j].im).abs() < TOL_DUPLICATE {
                return Err(Error::DuplicatePole { i, j });
            }
        }
    }
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| {
        w[i].re
            .total_cmp(&w[j].re)
            .then(w[i].im.total_cmp(&w[j].im))
    });
    let a: Vec<C64> = idx.iter().map(|&i| a[i]).collect();
    let w: Vec<C64> = idx.iter().map(|&i| w[i]).collect();
    let class = classify(&a, &w);
    Ok(RationalWindow { a, w, class })
}

fn classify(a: &[C64], w: &[C64]) -> WindowClass {
    let herglotz = a.iter().all(|c| c.im == 0.0 && c.re > 0.0) && w.iter().all(|c| c.im == 0.0 && c.re > 0.0);
    let distinct_re = w.windows(2).all(|p| (p[1].re - p[0].re).abs() >= TOL_DUPLICATE);
    let sum: C64 = a.iter().sum();
    let scale: f64 = a.iter().map(|c| c.norm()).sum();
    WindowClass {
        herglotz,
        all_re_neg: w.iter().all(|c| c.re < 0.0),
        all_re_pos: w.iter().all(|c| c.re > 0.0),
        distinct_re,
        zero_sum: sum.norm() <= 1e-12 * scale,
    }
}

impl RationalWindow {
    pub fn new(a: &[C64], w: &[C64]) -> Result<Self> {
        validate_window(a, w)
    }

    /// Convenience constructor for real coefficients and real poles.
    pub fn real(a: &[f64], w: &[f64]) -> Result<Self> {
        let a: Vec<C64> = a.iter().map(|&x| C64::new(x, 0.0)).collect();
        let w: Vec<C64> = w.iter().map(|&x| C64::new(x, 0.0)).collect();
        validate_window(&a, &w)
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn w(&self) -> &[C64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn class(&self) -> WindowClass {
        self.class
    }

    /// `g(t)`.
    pub fn eval(&self, t: f64) -> C64 {
        eval_window(self, t)
    }

    /// `m₀(ξ) = Σ a_k e^{2πξ w_k}`.
    pub fn m0(&self, xi: f64) -> C64 {
        self.a
            .iter()
            .zip(&self.w)
            .map(|(a, w)| a * (w * (TWO_PI * xi)).exp())
            .sum()
    }

    /// The window with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: C64) -> Result<Self> {
        let a: Vec<C64> = self.a.iter().map(|x| x * c).collect();
        validate_window(&a, &self.w)
    }
}

pub fn eval_window(g: &RationalWindow, t: f64) -> C64 {
    g.a
        .iter()
        .zip(&g.w)
        .map(|(a, w)| a / (C64::new(t, 0.0) - C64::i() * w))
        .sum()
}

/// Lattice `αℤ × βℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub alpha: f64,
    pub beta: f64,
}

impl Lattice {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidLattice { alpha, beta });
        }
        Ok(Lattice { alpha, beta })
    }

    /// `1/(αβ)`.
    pub fn density(&self) -> f64 {
        1.0 / (self.alpha * self.beta)
    }

    /// `α' = αβ`, the time step after rescaling to `β = 1`.
    pub fn normalized_alpha(&self) -> f64 {
        self.alpha * self.beta
    }
}

/// Rescale to `β = 1`: `a' = βa`, `w' = βw`, `α' = αβ`.
pub fn rescale_to_unit_beta(g: &RationalWindow, lat: &Lattice) -> (RationalWindow, f64) {
    let b = lat.beta;
    let a: Vec<C64> = g.a.iter().map(|x| x * b).collect();
    let w: Vec<C64> = g.w.iter().map(|x| x * b).collect();
    let class = classify(&a, &w);
    (RationalWindow { a, w, class }, lat.alpha * b)
}

/// Piecewise exponential profile of `g`, equal to `ĝ` up to a fixed nonzero constant.
///
/// For `ξ > 0` only poles with `Re w < 0` contribute; for `ξ < 0` only those with
/// `Re w > 0`, with a minus sign.
pub fn fourier_profile(g: &RationalWindow, xi: f64) -> Result<C64> {
    let side = |neg: bool| -> C64 {
        g.a
            .iter()
            .zip(&g.w)
            .filter(|(_, w)| (w.re < 0.0) == neg)
            .map(|(a, w)| a * (w * (TWO_PI * xi)).exp())
            .sum()
    };
    if xi > 0.0 {
        Ok(side(true))
    } else if xi < 0.0 {
        Ok(-side(false))
    } else if g.class.all_re_neg {
        Ok(side(true))
    } else if g.class.all_re_pos {
        Ok(-side(false))
    } else {
        Err(Error::UndefinedAtZero)
    }
}
