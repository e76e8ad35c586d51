//! Method-independent oracle for the criterion operator `L_ξ`.
//!
//! `L_ξ` has one column per lattice point `ξ + j/α'` and one row per pair `(j, n)`
//! with `y = ξ + j/α' − n ∈ [0, 1/α')`; that row carries the string `M(y)` in
//! columns `j, …, j+N−1`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::linalg::integrate;
use crate::multipliers::{multiplier_table, MultiplierTable};
use crate::orbit::{SectionMatrix, SectionRow};
use crate::window::{rescale_to_unit_beta, Lattice, RationalWindow};

/// Smallest normalized alpha for which sections are built.
pub const MIN_SECTION_ALPHA: f64 = 0.02;
/// Number of ξ samples used by the lower bound estimate.
pub const XI_SAMPLES: usize = 16;

/// Row values `y = ξ + c/α' − n ∈ [0, 1/α')` of column `c`.
pub fn column_values(alpha: f64, xi: f64, c: i64) -> Vec<(i64, f64)> {
    let p = 1.0 / alpha;
    let x = xi + c as f64 * p;
    let n_lo = (x - p).floor() as i64;
    let n_hi = x.floor() as i64 + 1;
    (n_lo..=n_hi)
        .filter_map(|n| {
            let y = x - n as f64;
            (y >= 0.0 && y < p).then_some((n, y))
        })
        .collect()
}

/// Rows of `L_ξ` whose first column lies in `[c_lo, c_hi]`, as `(start, n, y)`.
pub fn lxi_rows(alpha: f64, xi: f64, c_lo: i64, c_hi: i64) -> Vec<(i64, i64, f64)> {
    (c_lo..=c_hi)
        .flat_map(|c| column_values(alpha, xi, c).into_iter().map(move |(n, y)| (c, n, y)))
        .collect()
}

/// Column window `[c0, c0+size)` with every row of `L_ξ` that touches it, clipped.
pub fn interior_section(tab: &MultiplierTable, xi: f64, c0: i64, size: usize) -> SectionMatrix {
    let nn = tab.n() as i64;
    let c_hi = c0 + size as i64 - 1;
    let rows = lxi_rows(tab.alpha(), xi, c0 - nn + 1, c_hi)
        .into_iter()
        .map(|(j, _, y)| {
            let full = tab.string(y);
            let skip = (c0 - j).max(0) as usize;
            let keep = ((c_hi - j + 1).min(nn) as usize).saturating_sub(skip);
            SectionRow {
                col_offset: (j - c0).max(0) as usize,
                string: full[skip..skip + keep].to_vec(),
                point: y,
            }
        })
        .filter(|r| !r.string.is_empty())
        .collect();
    SectionMatrix::new(rows, size, tab.n())
}

/// Row window `[c0, c0+size)` with every column those rows touch.
pub fn padded_section(tab: &MultiplierTable, xi: f64, c0: i64, size: usize) -> SectionMatrix {
    let rows = lxi_rows(tab.alpha(), xi, c0, c0 + size as i64 - 1)
        .into_iter()
        .map(|(j, _, y)| SectionRow {
            col_offset: (j - c0) as usize,
            string: tab.string(y),
            point: y,
        })
        .collect();
    SectionMatrix::new(rows, size + tab.n() - 1, tab.n())
}

/// Section of `L_ξ` spanning `depth` returns of the orbit on each side of column 0.
///
/// A return column is one that carries a value in `(1, 1/α')`.
pub fn section_matrix(tab: &MultiplierTable, xi: f64, depth: usize) -> Result<SectionMatrix> {
    let alpha = tab.alpha();
    if alpha <= MIN_SECTION_ALPHA {
        return Err(Error::ConfigLimit(format!("alpha' = {alpha} gives too many columns")));
    }
    let p = 1.0 / alpha;
    let xi = xi.rem_euclid(p);
    // At α' = 1 every column counts as a return.
    let critical = alpha >= 1.0 - 1e-12;
    let is_return = |c: i64| critical || column_values(alpha, xi, c).iter().any(|(_, y)| *y > 1.0);
    let limit = 1_000_000i64;
    let mut hi = 0i64;
    let mut seen = 0;
    while seen < depth {
        hi += 1;
        if hi > limit {
            return Err(Error::ConfigLimit("return search exceeded column limit".into()));
        }
        if is_return(hi) {
            seen += 1;
        }
    }
    let mut lo = 0i64;
    seen = 0;
    while seen < depth {
        lo -= 1;
        if -lo > limit {
            return Err(Error::ConfigLimit("return search exceeded column limit".into()));
        }
        if is_return(lo) {
            seen += 1;
        }
    }
    Ok(interior_section(tab, xi, lo, (hi - lo + 1) as usize))
}

/// Low-discrepancy (van der Corput) samples of `[0, period)`.
pub fn xi_sample(period: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let (mut x, mut f, mut k) = (0.0, 0.5, i);
            while k > 0 {
                if k & 1 == 1 {
                    x += f;
                }
                k >>= 1;
                f *= 0.5;
            }
            x * period
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    pub size: usize,
    /// `min_ξ σ_min²` of the interior-restricted section.
    pub interior_min_sq: f64,
    /// `min_ξ σ_min²` of the zero-padded section.
    pub padded_min_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundEstimate {
    pub a_est: f64,
    pub convergence: f64,
    pub per_size: Vec<SizeEstimate>,
    pub xi_samples: Vec<f64>,
}

/// Finite-section estimate of the lower criterion bound.
pub fn lower_bound_estimate(g: &RationalWindow, lat: &Lattice, sizes: &[usize]) -> Result<LowerBoundEstimate> {
    let (h, alpha) = rescale_to_unit_beta(g, lat);
    let tab = multiplier_table(&h, alpha)?;
    lower_bound_from_table(&tab, sizes)
}

pub fn lower_bound_from_table(tab: &MultiplierTable, sizes: &[usize]) -> Result<LowerBoundEstimate> {
    let alpha = tab.alpha();
    if alpha <= MIN_SECTION_ALPHA {
        return Err(Error::ConfigLimit(format!("alpha' = {alpha} gives too many columns")));
    }
    if sizes.is_empty() {
        return Err(Error::Input("no section sizes given".into()));
    }
    let xis = xi_sample(1.0 / alpha, XI_SAMPLES);
    let jobs: Vec<(usize, f64)> = sizes.iter().flat_map(|&s| xis.iter().map(move |&x| (s, x))).collect();
    let vals: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(size, xi)| {
            let c0 = -(size as i64) / 2;
            let inner = interior_section(tab, xi, c0, size).sigma_min();
            let padded = padded_section(tab, xi, c0, size).sigma_min();
            (inner * inner, padded * padded)
        })
        .collect();
    let per_size: Vec<SizeEstimate> = sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let chunk = &vals[i * xis.len()..(i + 1) * xis.len()];
            SizeEstimate {
                size,
                interior_min_sq: chunk.iter().map(|v| v.0).fold(f64::INFINITY, f64::min),
                padded_min_sq: chunk.iter().map(|v| v.1).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let last = per_size.last().expect("nonempty").interior_min_sq;
    let convergence = if per_size.len() >= 2 {
        let prev = per_size[per_size.len() - 2].interior_min_sq;
        if last > 0.0 {
            (last - prev).abs() / last
        } else {
            f64::INFINITY
        }
    } else {
        f64::NAN
    };
    Ok(LowerBoundEstimate { a_est: last, convergence, per_size, xi_samples: xis })
}

/// Which shift convention the quadratic form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `Σ_n |Σ_s G(ξ + n + s/α') m_s(ξ)|²`.
    #[default]
    Forward,
    /// `Σ_n |Σ_s G(ξ + n − s/α') m_s(ξ)|²`.
    Reflected,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Reflected => -1.0,
        }
    }
}

/// One constant piece `value·1_{[lo, hi)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(with = "complex_pair")]
    pub value: C64,
}

/// Piecewise-constant test function with disjoint pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    pub pieces: Vec<Piece>,
}

impl PiecewiseConstant {
    pub fn indicator(lo: f64, hi: f64) -> Self {
        PiecewiseConstant { pieces: vec![Piece { lo, hi, value: C64::new(1.0, 0.0) }] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.pieces.iter().map(|p| p.value.norm_sqr() * (p.hi - p.lo).max(0.0)).sum()
    }

    fn at(&self, x: f64) -> C64 {
        self.pieces
            .iter()
            .filter(|p| p.lo <= x && x < p.hi)
            .map(|p| p.value)
            .sum()
    }
}

pub(crate) mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Rayleigh quotient `Q(G)/‖G‖²` of the criterion form.
pub fn quadratic_form(tab: &MultiplierTable, spec: &PiecewiseConstant, orientation: Orientation) -> Result<f64> {
    let live: Vec<&Piece> = spec.pieces.iter().filter(|p| p.hi > p.lo && p.value.norm() > 0.0).collect();
    if live.is_empty() {
        return Ok(0.0);
    }
    if live.iter().any(|p| !p.lo.is_finite() || !p.hi.is_finite()) {
        return Err(Error::UnboundedSupport);
    }
    let norm = spec.norm_sqr();
    let p = 1.0 / tab.alpha();
    let nn = tab.n();
    let sg = orientation.sign();
    let smin = live.iter().map(|q| q.lo).fold(f64::INFINITY, f64::min);
    let smax = live.iter().map(|q| q.hi).fold(f64::NEG_INFINITY, f64::max);
    let span = (nn as f64 - 1.0) * p;
    let n_lo = (smin - p - span).floor() as i64 - 1;
    let n_hi = (smax + span).ceil() as i64 + 1;
    let mut total = 0.0;
    for n in n_lo..=n_hi {
        let mut cuts = vec![0.0, p];
        for q in &live {
            for s in 0..nn {
                let off = n as f64 + sg * s as f64 * p;
                for b in [q.lo - off, q.hi - off] {
                    if b > 0.0 && b < p {
                        cuts.push(b);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 <= x0 {
                continue;
            }
            let xm = 0.5 * (x0 + x1);
            let coefs: Vec<C64> = (0..nn)
                .map(|s| spec.at(xm + n as f64 + sg * s as f64 * p))
                .collect();
            if coefs.iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            let e = coefs
                .iter()
                .enumerate()
                .fold(ExpPoly::zero(), |acc, (s, c)| acc.add(&tab.m(s).scale(*c)));
            total += integrate(|x| e.eval(x).norm_sqr(), x0, x1, 1e-12);
        }
    }
    Ok(total / norm)
}

/// `Q(G_δ)/‖G_δ‖²` for indicators of `[center − δ, center + δ]`.
pub fn witness_decay(
    g: &RationalWindow,
    lat: &Lattice,
    center: f64,
    deltas: &[f64],
    orientation: Orientation,
) -> Result<Vec<f64>> {
    let (h, alpha) = rescale_to_unit_beta(g, lat);
    let tab = multiplier_table(&h, alpha)?;
    deltas
        .iter()
        .map(|&d| quadratic_form(&tab, &PiecewiseConstant::indicator(center - d, center + d), orientation))
        .collect()
}

/// Successive ratio quotients `r_{i+1}/r_i`.
pub fn decay_quotients(ratios: &[f64]) -> Vec<f64> {
    ratios.windows(2).map(|w| w[1] / w[0]).collect()
}

/// A replayable non-frame witness: indicator functions around `center` in the
/// normalized (`β = 1`) coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub center: f64,
    pub deltas: Vec<f64>,
    pub orientation: Orientation,
    /// Pieces of the smallest probe.
    pub pieces: Vec<Piece>,
    pub ratios: Vec<f64>,
    pub quotients: Vec<f64>,
}

impl WitnessSpec {
    /// Evaluate the probes and record their Rayleigh quotients.
    pub fn evaluate(
        g: &RationalWindow,
        lat: &Lattice,
        center: f64,
        deltas: &[f64],
        orientation: Orientation,
    ) -> Result<Self> {
        let ratios = witness_decay(g, lat, center, deltas, orientation)?;
        let d = deltas.last().copied().unwrap_or(0.0);
        Ok(WitnessSpec {
            center,
            deltas: deltas.to_vec(),
            orientation,
            pieces: PiecewiseConstant::indicator(center - d, center + d).pieces,
            quotients: decay_quotients(&ratios),
            ratios,
        })
    }

    /// Ratios decay like `δ²`: every quotient at most 0.5 across at least two halvings.
    pub fn decays(&self) -> bool {
        self.quotients.len() >= 2 && self.quotients.iter().all(|&q| q <= 0.5)
    }
}

/// `B_crit = N·⌈1/α'⌉·sup_ξ Σ_s |m_s(ξ)|²` over one period, with derivative slack.
pub fn upper_bound_estimate(tab: &MultiplierTable) -> f64 {
    const GRID: usize = 4096;
    let p = 1.0 / tab.alpha();
    let nn = tab.n();
    let derivs: Vec<ExpPoly> = (0..nn).map(|s| tab.m(s).derivative()).collect();
    let h = p / GRID as f64;
    let sup = (0..=GRID)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * h;
            let (lo, hi) = ((x - 0.5 * h).max(0.0), (x + 0.5 * h).min(p));
            let val: f64 = tab.string(x).iter().map(|v| v.norm_sqr()).sum();
            let slope: f64 = (0..nn)
                .map(|s| 2.0 * tab.m(s).sup_bound(lo, hi) * derivs[s].sup_bound(lo, hi))
                .sum();
            val + 0.5 * h * slope
        })
        .reduce(|| 0.0, f64::max);
    let rows_per_point = (p - 1e-9).ceil().max(1.0);
    nn as f64 * rows_per_point * sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    fn table(a: &[f64], w: &[f64], alpha: f64) -> MultiplierTable {
        multiplier_table(&RationalWindow::real(a, w).unwrap(), alpha).unwrap()
    }

    #[test]
    fn rows_cover_each_column() {
        let alpha = 0.7;
        for c in -5..5 {
            let v = column_values(alpha, 0.3, c);
            assert!(!v.is_empty() && v.len() <= 2);
        }
        assert_eq!(column_values(0.3, 0.1, 0).len(), 4);
    }

    #[test]
    fn n1_section_is_diagonal() {
        let tab = table(&[1.0], &[1.0], 1.0);
        let s = section_matrix(&tab, 0.4, 3).unwrap();
        let want = s
            .rows
            .iter()
            .map(|r| r.string[0].norm())
            .fold(f64::INFINITY, f64::min);
        assert!((s.sigma_min() - want).abs() < 1e-10 * want);
    }

    #[test]
    fn depth_grows_rows_linearly() {
        let tab = table(&[1.0, 1.0], &[1.0, 2.0], 0.7);
        let r1 = section_matrix(&tab, 1.2, 10).unwrap().rows.len();
        let r2 = section_matrix(&tab, 1.2, 20).unwrap().rows.len();
        let ratio = r2 as f64 / r1 as f64;
        assert!(ratio > 1.7 && ratio < 2.3, "{r1} {r2}");
    }

    #[test]
    fn lower_bound_n1() {
        let g = RationalWindow::real(&[1.0], &[1.0]).unwrap();
        let est = lower_bound_estimate(&g, &Lattice::new(1.0, 1.0).unwrap(), &[50, 100]).unwrap();
        assert!((est.a_est - 1.0).abs() < 1e-6, "{}", est.a_est);
    }

    #[test]
    fn interior_not_below_padded() {
        let g = RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let est = lower_bound_estimate(&g, &Lattice::new(0.7, 1.0).unwrap(), &[40, 80]).unwrap();
        for s in &est.per_size {
            assert!(s.interior_min_sq >= s.padded_min_sq * (1.0 - 1e-9));
        }
    }

    #[test]
    fn quadratic_form_closed_form() {
        let tab = table(&[1.0], &[1.0], 1.0);
        let q = quadratic_form(&tab, &PiecewiseConstant::indicator(0.0, 1.0), Orientation::Forward).unwrap();
        let want = ((2.0 * TWO_PI).exp() - 1.0) / (2.0 * TWO_PI);
        assert!((q - want).abs() < 1e-9 * want);
        let zero = PiecewiseConstant { pieces: vec![] };
        assert_eq!(quadratic_form(&tab, &zero, Orientation::Forward).unwrap(), 0.0);
        let unb = PiecewiseConstant::indicator(0.0, f64::INFINITY);
        assert_eq!(quadratic_form(&tab, &unb, Orientation::Forward), Err(Error::UnboundedSupport));
    }

    #[test]
    fn local_probe_matches_string_energy() {
        let tab = table(&[1.0, 1.0], &[1.0, 2.0], 0.7);
        let c = 0.37;
        let q = quadratic_form(&tab, &PiecewiseConstant::indicator(c - 1e-3, c + 1e-3), Orientation::Forward)
            .unwrap();
        // With a tiny support each row meets the probe in one entry; the form
        // sums |m_s(y)|² over rows at the points y where column c's entries sit.
        let want: f64 = column_values_all(&tab, c);
        assert!((q - want).abs() < 0.1 * want, "{q} {want}");
    }

    fn column_values_all(tab: &MultiplierTable, x: f64) -> f64 {
        let p = 1.0 / tab.alpha();
        let mut tot = 0.0;
        for s in 0..tab.n() {
            for n in -10i64..10 {
                let y = x - n as f64 - s as f64 * p;
                if (0.0..p).contains(&y) {
                    tot += tab.string(y)[s].norm_sqr();
                }
            }
        }
        tot
    }

    #[test]
    fn upper_bound_examples() {
        let tab = table(&[1.0], &[1.0], 1.0);
        let b = upper_bound_estimate(&tab);
        let want = (2.0 * TWO_PI).exp();
        assert!(b >= want && b < want * 1.005, "{b}");
        let tab2 = table(&[2.0], &[1.0], 1.0);
        assert!((upper_bound_estimate(&tab2) / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_below_upper_bound() {
        let tab = table(&[1.0, -0.5, 2.0], &[1.0, -0.4, 0.3], 0.8);
        let b = upper_bound_estimate(&tab);
        for (lo, hi) in [(0.0, 1.0), (-2.0, 3.0), (0.4, 0.41)] {
            let q = quadratic_form(&tab, &PiecewiseConstant::indicator(lo, hi), Orientation::Forward).unwrap();
            assert!(q <= b);
            let q = quadratic_form(&tab, &PiecewiseConstant::indicator(lo, hi), Orientation::Reflected).unwrap();
            assert!(q <= b);
        }
    }
}
