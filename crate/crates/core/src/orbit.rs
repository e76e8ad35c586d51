//! Orbits `S_{ξ,l}`, the string matrices `D(ξ,l)`, the full-rank window search and
//! the certifier for irrational `αβ`.
//!
//! An orbit starts at `ξ ∈ (1, 1/α')`, steps by `−1` inside a lattice column and by
//! `+τ = 1/α' − 1` into the next column, until it returns to `(1, 1/α')`. Point
//! `ξ₀ − n + mτ` always sits in column `m`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{certified_min_modulus, ExpPoly};
use crate::linalg::{banded_sigma_min, dense_sigma_min, rational_approximation, BandRow};
use crate::multipliers::{multiplier_table, MultiplierTable};
use crate::oracle::{column_values, interior_section, upper_bound_estimate};
use crate::report::{Certificate, CertificationReport, Method, Verdict};
use crate::window::{rescale_to_unit_beta, Lattice, RationalWindow};
use crate::TWO_PI;

/// Points closer than this to an endpoint or an earlier return are collisions.
pub const COLLISION_TOL: f64 = 1e-12;
/// Relative rank tolerance for `D(ξ,l)`.
pub const TOL_RANK: f64 = 1e-8;
/// Largest denominator treated as rational.
pub const Q_MAX: i64 = 64;
/// Distance to a convergent below which α' counts as rational.
pub const RATIONAL_TOL: f64 = 1e-9;
const MAX_POINTS: usize = 1_000_000;

/// One row of a section: `string` placed from column `col_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionRow {
    pub col_offset: usize,
    pub string: Vec<C64>,
    pub point: f64,
}

/// Sparse finite section of the criterion operator.
///
/// Rows of a clipped section may carry fewer than `n` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionMatrix {
    pub rows: Vec<SectionRow>,
    pub n_cols: usize,
    pub n: usize,
}

impl SectionMatrix {
    pub fn new(rows: Vec<SectionRow>, n_cols: usize, n: usize) -> Self {
        SectionMatrix { rows, n_cols, n }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.n_cols);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r.string.iter().enumerate() {
                if r.col_offset + j < self.n_cols {
                    m[(i, r.col_offset + j)] = *v;
                }
            }
        }
        m
    }

    pub fn band_rows(&self) -> Vec<BandRow> {
        self.rows
            .iter()
            .map(|r| {
                let len = r.string.len().min(self.n_cols.saturating_sub(r.col_offset));
                BandRow { start: r.col_offset, vals: r.string[..len].to_vec() }
            })
            .collect()
    }

    pub fn sigma_min(&self) -> f64 {
        banded_sigma_min(self.n_cols, &self.band_rows())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub value: f64,
    pub n_shift: i64,
    pub m_shift: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub xi0: f64,
    pub alpha: f64,
    pub tau: f64,
    pub points: Vec<OrbitPoint>,
    /// Return counts `k₁, …, k_l`.
    pub k: Vec<usize>,
    pub big_k: usize,
    pub levels: usize,
}

impl OrbitRecord {
    /// Returns into `(1, 1/α')` at the end of each level, starting with `ξ₀`.
    pub fn level_points(&self) -> Vec<OrbitPoint> {
        let mut out = vec![self.points[0]];
        let p = 1.0 / self.alpha;
        let mut prev_col = 0;
        for pt in &self.points[1..] {
            if pt.m_shift != prev_col && pt.value > 1.0 && pt.value < p {
                out.push(*pt);
            }
            prev_col = pt.m_shift;
        }
        out
    }
}

/// Generate `S_{ξ,l}`.
pub fn orbit(xi: f64, alpha: f64, l: usize) -> Result<OrbitRecord> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    let p = 1.0 / alpha;
    let tau = p - 1.0;
    if !(xi > 1.0 && xi < p) {
        return Err(Error::InvalidStart { xi });
    }
    if l == 0 {
        return Err(Error::Input("orbit needs at least one level".into()));
    }
    let value = |n: i64, m: i64| xi - n as f64 + m as f64 * tau;
    let hits_edge = |v: f64| [0.0, 1.0, p].iter().any(|e| (v - e).abs() < COLLISION_TOL);
    let mut points = vec![OrbitPoint { value: xi, n_shift: 0, m_shift: 0 }];
    let mut returns = vec![xi];
    let mut k = Vec::with_capacity(l);
    let (mut n, mut m) = (0i64, 0i64);
    let push = |n: i64, m: i64, points: &mut Vec<OrbitPoint>| -> Result<f64> {
        let v = value(n, m);
        if hits_edge(v) {
            return Err(Error::RationalCollision { value: v });
        }
        if points.len() >= MAX_POINTS {
            return Err(Error::ConfigLimit("orbit exceeds point limit".into()));
        }
        points.push(OrbitPoint { value: v, n_shift: n, m_shift: m });
        Ok(v)
    };
    for _ in 0..l {
        loop {
            n += 1;
            if push(n, m, &mut points)? <= 1.0 {
                break;
            }
        }
        let mut ki = 0;
        loop {
            m += 1;
            ki += 1;
            if push(n, m, &mut points)? > 1.0 {
                break;
            }
        }
        let v = value(n, m);
        if returns.iter().any(|r| (r - v).abs() < COLLISION_TOL) {
            return Err(Error::RationalCollision { value: v });
        }
        returns.push(v);
        k.push(ki);
    }
    loop {
        n += 1;
        if push(n, m, &mut points)? <= 1.0 {
            break;
        }
    }
    let big_k = k.iter().sum();
    Ok(OrbitRecord { xi0: xi, alpha, tau, points, k, big_k, levels: l })
}

/// `D(ξ,l)`: one row per orbit point, string `M(point)` from column `m_shift`.
pub fn build_d(tab: &MultiplierTable, orb: &OrbitRecord) -> SectionMatrix {
    let rows = orb
        .points
        .iter()
        .map(|pt| SectionRow {
            col_offset: pt.m_shift as usize,
            string: tab.string(pt.value),
            point: pt.value,
        })
        .collect();
    SectionMatrix::new(rows, orb.big_k + tab.n(), tab.n())
}

/// Row-normalized dense rendering; rank is unchanged and magnitudes become comparable.
fn normalized_dense(d: &SectionMatrix) -> DMatrix<C64> {
    let mut m = d.to_dense();
    for mut row in m.row_iter_mut() {
        let nrm = row.norm();
        if nrm > 0.0 {
            row /= C64::new(nrm, 0.0);
        }
    }
    m
}

/// Greedy row pivoting by residual norm (modified Gram–Schmidt on rows).
fn pivot_rows(m: &DMatrix<C64>, count: usize) -> Vec<usize> {
    let mut resid: Vec<Vec<C64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count.min(resid.len()) {
        let (best, _) = resid
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, r.iter().map(|v| v.norm_sqr()).sum::<f64>()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("rows remain");
        let q = resid[best].clone();
        let qn = q.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        chosen.push(best);
        if qn == 0.0 {
            continue;
        }
        let q: Vec<C64> = q.iter().map(|v| v / qn).collect();
        for (i, r) in resid.iter_mut().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            for _ in 0..2 {
                let dot: C64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
                r.iter_mut().zip(&q).for_each(|(x, a)| *x -= dot * a);
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

fn selected_sigma(m: &DMatrix<C64>, rows: &[usize]) -> f64 {
    let sub = DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)]);
    dense_sigma_min(&sub)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullRankWindow {
    pub xi_hat: f64,
    pub l: usize,
    pub delta: f64,
    /// Smallest singular value of the selected square block of the row-normalized `D`.
    pub sigma_min: f64,
    pub rows: Vec<usize>,
    pub k: Vec<usize>,
}

fn evaluate_window(tab: &MultiplierTable, xi: f64, l: usize) -> Option<(f64, Vec<usize>, Vec<usize>)> {
    let orb = orbit(xi, tab.alpha(), l).ok()?;
    let d = build_d(tab, &orb);
    if d.rows.len() < d.n_cols {
        return None;
    }
    let m = normalized_dense(&d);
    let rows = pivot_rows(&m, d.n_cols);
    let s = selected_sigma(&m, &rows);
    let scale = m.norm();
    (s > TOL_RANK * scale).then_some((s, rows, orb.k))
}

/// Search `(1, 1/α')` and `l ≤ l_max` for a `D(ξ,l)` of full column rank.
pub fn full_rank_window(tab: &MultiplierTable, l_max: usize, grid: usize) -> Result<FullRankWindow> {
    let alpha = tab.alpha();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    let tau = 1.0 / alpha - 1.0;
    let cands: Vec<(f64, usize)> = (0..grid)
        .flat_map(|i| {
            let xi = 1.0 + (i as f64 + 0.5) / grid as f64 * tau;
            (1..=l_max).map(move |l| (xi, l))
        })
        .collect();
    let best = cands
        .par_iter()
        .filter_map(|&(xi, l)| evaluate_window(tab, xi, l).map(|(s, rows, k)| (s, xi, l, rows, k)))
        .reduce_with(|a, b| {
            // Deterministic preference: larger σ, then smaller ξ, then smaller l.
            let ord = a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(b.2.cmp(&a.2));
            if ord.is_ge() {
                a
            } else {
                b
            }
        });
    let (sigma, xi_hat, l, rows, k) = best.ok_or(Error::NotFound)?;
    let p = 1.0 / alpha;
    let stays = |x: f64, need: f64| -> bool {
        let Ok(orb) = orbit(x, alpha, l) else { return false };
        if orb.k != k {
            return false;
        }
        let m = normalized_dense(&build_d(tab, &orb));
        selected_sigma(&m, &rows) >= need
    };
    let mut delta = 2.0 * tau / grid as f64;
    delta = delta.min(0.5 * (xi_hat - 1.0)).min(0.5 * (p - xi_hat));
    for _ in 0..60 {
        let ok = [-1.0, -0.5, 0.5, 1.0]
            .iter()
            .all(|f| stays(xi_hat + f * delta, 0.5 * sigma));
        if ok {
            return Ok(FullRankWindow { xi_hat, l, delta, sigma_min: sigma, rows, k });
        }
        delta *= 0.5;
    }
    Err(Error::NotFound)
}

/// Result of the `m₀ ≠ 0` check on the positive half-axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M0Check {
    pub ok: bool,
    /// Grid minimum of `|m₀|` on `[ε, X]`.
    pub min_abs: f64,
    /// Certified lower bound of `|m₀|` on `[ε, X]`.
    pub lower_bound: f64,
    /// Beyond this point the leading exponential dominates the others.
    pub xi_star: f64,
    /// Left end of the certified interval (0 unless `m₀(0) = 0`).
    pub eps: f64,
    pub upper: f64,
    pub zero_at: Option<f64>,
}

/// Certify `m₀(ξ) = Σ aₖ e^{2πξwₖ} ≠ 0` for `ξ > 0`.
pub fn m0_nonvanishing(tab: &MultiplierTable) -> Result<M0Check> {
    let w = tab.w();
    let a = tab.a();
    let n = w.len();
    if w.windows(2).any(|p| (p[1].re - p[0].re).abs() < 1e-12) {
        return Err(Error::DegenerateRe);
    }
    let d = n - 1;
    let mut xi_star: f64 = 0.0;
    for k in 0..d {
        let ratio = (n - 1) as f64 * a[k].norm() / a[d].norm();
        let gap = TWO_PI * (w[d].re - w[k].re);
        xi_star = xi_star.max(ratio.ln() / gap);
    }
    let xi_star = xi_star.max(0.0) * (1.0 + 1e-9) + 1e-12;
    let upper = xi_star.max(1.0 / tab.alpha());
    let m0 = tab.m(0);
    let scale0 = m0.abs_terms(0.0);
    let eps = if m0.eval(0.0).norm() <= 1e-12 * scale0 { 1e-3 * upper } else { 0.0 };
    let mut cells = 4096;
    loop {
        let (bound, _) = certified_min_modulus(m0, eps, upper, cells);
        let h = (upper - eps) / cells as f64;
        let min_abs = (0..=cells).map(|i| m0.eval(eps + i as f64 * h).norm()).fold(f64::INFINITY, f64::min);
        let check = |ok, lower_bound, zero_at| M0Check { ok, min_abs, lower_bound, xi_star, eps, upper, zero_at };
        if bound > 0.0 {
            return Ok(check(true, bound, None));
        }
        if let Some(z) = locate_zero(m0, eps, upper, cells) {
            return Ok(check(false, 0.0, Some(z)));
        }
        cells *= 4;
        if cells > 1 << 16 {
            return Ok(check(false, 0.0, None));
        }
    }
}

/// Golden-section refinement of `|f|` around the smallest grid value.
fn locate_zero(f: &ExpPoly, lo: f64, hi: f64, cells: usize) -> Option<f64> {
    let h = (hi - lo) / cells as f64;
    let (i, _) = (0..=cells)
        .map(|i| (i, f.eval(lo + i as f64 * h).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let (mut a, mut b) = ((lo + (i as f64 - 1.0) * h).max(lo), (lo + (i as f64 + 1.0) * h).min(hi));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if f.eval(c).norm() < f.eval(d).norm() {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    (f.eval(x).norm() <= 1e-9 * f.abs_terms(x)).then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrationalCertificate {
    pub window: FullRankWindow,
    /// Rows of `D(ξ̂,l)` as constructed (`K + l + 2`).
    pub d_rows: usize,
    /// Row count stated in the source construction (`K + l + 1`).
    pub d_rows_stated: usize,
    pub big_k: usize,
    /// Empirical bound on the number of backward returns needed to enter the window.
    pub return_bound: usize,
    /// Upper bound on how many blocks share a column.
    pub overlap: usize,
    /// `min σ_min` over blocks closed under all touching rows.
    pub block_sigma_min: f64,
    /// `min σ_min` of the raw `C(ξ,l,t)` truncations.
    pub c_block_sigma_min: f64,
    /// `(min c_block σ)² / overlap`.
    pub a_crit_overlap: f64,
    /// Smallest diagonal entry `|m₀(·)|` of the triangular block.
    pub x_diag_min: f64,
    pub x_upper_triangular: bool,
    pub m0: M0Check,
}

/// Largest value of column `c`, in `[τ, 1/α')`; the column is a return iff it exceeds 1.
fn column_top(alpha: f64, xi: f64, c: i64) -> f64 {
    let p = 1.0 / alpha;
    let x = xi + c as f64 * p;
    let y = x - ((x - p).floor() + 1.0);
    if y >= p {
        y - 1.0
    } else {
        y
    }
}

/// Backward return columns of `ξ` (columns `c < 0` carrying a value in `(1, 1/α')`).
fn backward_returns(alpha: f64, xi: f64, count: usize) -> Result<Vec<(i64, f64)>> {
    let mut out = Vec::with_capacity(count);
    let mut c = 0i64;
    while out.len() < count {
        c -= 1;
        if c < -(MAX_POINTS as i64) {
            return Err(Error::ConfigLimit("backward return search exceeded limit".into()));
        }
        let y = column_top(alpha, xi, c);
        if y > 1.0 {
            out.push((c, y));
        }
    }
    Ok(out)
}

/// Number of backward returns from `s` until the orbit lands in `[lo, hi]`.
fn hitting_time(alpha: f64, s: f64, lo: f64, hi: f64, cap: usize) -> Option<usize> {
    let mut c = 0i64;
    let mut t = 0;
    while t < cap {
        c -= 1;
        let y = column_top(alpha, s, c);
        if y > 1.0 {
            t += 1;
            if y >= lo && y <= hi {
                return Some(t);
            }
        }
    }
    None
}

pub fn certify_irrational(g: &RationalWindow, lat: &Lattice) -> Result<CertificationReport> {
    let alpha = lat.normalized_alpha();
    if !(alpha > 0.0 && alpha < 1.0 - 1e-12) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    if !g.class().distinct_re {
        return Err(Error::DegenerateRe);
    }
    if let Some((p, q)) = rational_approximation(alpha, Q_MAX, RATIONAL_TOL) {
        return Err(Error::EffectivelyRational { p, q });
    }
    let (h, alpha) = rescale_to_unit_beta(g, lat);
    let tab = multiplier_table(&h, alpha)?;
    let m0 = m0_nonvanishing(&tab)?;
    if !m0.ok {
        return Err(Error::M0Vanishes { xi: m0.zero_at });
    }
    let win = match full_rank_window(&tab, 3 * tab.n(), 2048) {
        Ok(w) => w,
        Err(Error::NotFound) => {
            return Ok(CertificationReport::inconclusive(Method::Irrational, "no full-rank orbit window"))
        }
        Err(e) => return Err(e),
    };
    let p = 1.0 / alpha;
    let (wlo, whi) = (win.xi_hat - win.delta, win.xi_hat + win.delta);
    const STARTS: usize = 4096;
    let cap = 1_000_000;
    let times: Vec<Option<usize>> = (0..STARTS)
        .into_par_iter()
        .map(|i| {
            let s = 1.0 + (i as f64 + 0.5) / STARTS as f64 * (p - 1.0);
            hitting_time(alpha, s, wlo, whi, cap)
        })
        .collect();
    let Some(t_max) = times.iter().copied().collect::<Option<Vec<_>>>().and_then(|v| v.into_iter().max()) else {
        return Ok(CertificationReport::inconclusive(Method::Irrational, "return time exceeds search cap"));
    };
    let t_bound = t_max + 1;

    let nn = tab.n();
    let tau = p - 1.0;
    const BLOCK_SAMPLES: usize = 4;
    let blocks: Vec<Result<(f64, f64, f64, bool, usize)>> = (0..BLOCK_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let xi = wlo + (i as f64 + 0.5) / BLOCK_SAMPLES as f64 * (whi - wlo);
            let orb = orbit(xi, alpha, win.l)?;
            let big_k = orb.big_k as i64;
            let back = backward_returns(alpha, xi, t_bound)?;
            let c_left = back.last().expect("t_bound >= 1").0;
            let width = (big_k + nn as i64 - c_left) as usize;
            let closed = interior_section(&tab, xi, c_left, width).sigma_min();
            let c_rows: Vec<BandRow> = crate::oracle::lxi_rows(alpha, xi, c_left, big_k)
                .into_iter()
                .map(|(j, _, y)| BandRow { start: (j - c_left) as usize, vals: tab.string(y) })
                .collect();
            let c_sigma = banded_sigma_min(width, &c_rows);
            let mut diag_min = f64::INFINITY;
            let mut triangular = true;
            for c in c_left..0 {
                let vals = column_values(alpha, xi, c);
                let chosen: Vec<_> = vals.iter().filter(|(_, y)| *y > tau && *y <= p).collect();
                if chosen.len() != 1 {
                    triangular = false;
                    continue;
                }
                diag_min = diag_min.min(tab.m(0).eval(chosen[0].1).norm());
            }
            Ok((closed, c_sigma, diag_min, triangular, orb.points.len()))
        })
        .collect();
    let mut block_sigma = f64::INFINITY;
    let mut c_sigma_min = f64::INFINITY;
    let mut x_diag_min = f64::INFINITY;
    let mut triangular = true;
    for b in blocks {
        let (cl, cs, dm, tri, _) = b?;
        block_sigma = block_sigma.min(cl);
        c_sigma_min = c_sigma_min.min(cs);
        x_diag_min = x_diag_min.min(dm);
        triangular &= tri;
    }
    let overlap = t_bound + win.l + 1;
    let orb = orbit(win.xi_hat, alpha, win.l)?;
    let cert = IrrationalCertificate {
        d_rows: orb.points.len(),
        d_rows_stated: orb.big_k + win.l + 1,
        big_k: orb.big_k,
        window: win,
        return_bound: t_bound,
        overlap,
        block_sigma_min: block_sigma,
        c_block_sigma_min: c_sigma_min,
        a_crit_overlap: c_sigma_min * c_sigma_min / overlap as f64,
        x_diag_min,
        x_upper_triangular: triangular,
        m0,
    };
    let verdict = if block_sigma > 0.0 && triangular {
        Verdict::FrameCertified
    } else {
        Verdict::Inconclusive
    };
    let mut rep = CertificationReport::new(verdict, Method::Irrational, Certificate::Irrational(cert));
    rep.a_crit = Some(block_sigma * block_sigma);
    rep.b_crit = Some(upper_bound_estimate(&tab));
    rep.diag("bound", "criterion operator, closed block sections");
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_example() {
        let o = orbit(1.3, 0.7, 1).unwrap();
        let vals: Vec<f64> = o.points.iter().map(|p| p.value).collect();
        let want = [1.3, 0.3, 0.3 + 3.0 / 7.0, 0.3 + 6.0 / 7.0, 0.3 + 6.0 / 7.0 - 1.0];
        for (v, w) in vals.iter().zip(&want) {
            assert!((v - w).abs() < 1e-12);
        }
        assert_eq!(o.k, vec![2]);
        assert_eq!(o.big_k, 2);
        assert_eq!(o.points.len(), o.big_k + o.levels + 2);
    }

    #[test]
    fn orbit_bookkeeping() {
        let o = orbit(1.2345, std::f64::consts::FRAC_1_SQRT_2, 7).unwrap();
        for p in &o.points {
            let v = o.xi0 - p.n_shift as f64 + p.m_shift as f64 * o.tau;
            assert!((v - p.value).abs() < 1e-12);
            assert!(p.value > 0.0 && p.value < 1.0 / o.alpha);
        }
        assert_eq!(o.k.iter().sum::<usize>(), o.big_k);
        assert!(o.k.iter().all(|&k| k >= 1));
        let lv = o.level_points();
        assert_eq!(lv.len(), o.levels + 1);
        assert!(lv.iter().all(|p| p.value > 1.0));
    }

    #[test]
    fn orbit_rational_collision() {
        assert!(matches!(orbit(1.5, 0.6, 5), Err(Error::RationalCollision { .. })));
        assert!(matches!(orbit(1.5, 1.2, 1), Err(Error::AlphaOutOfRange { .. })));
        assert!(matches!(orbit(0.5, 0.7, 1), Err(Error::InvalidStart { .. })));
    }

    #[test]
    fn generalized_orbit_small_alpha() {
        let alpha = 1.0 / (2.0 + 2f64.sqrt());
        let o = orbit(2.5, alpha, 3).unwrap();
        for p in &o.points {
            assert!(p.value > 0.0 && p.value < 1.0 / alpha);
        }
        assert_eq!(o.level_points().len(), 4);
    }

    #[test]
    fn d_structure() {
        let g = RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let tab = multiplier_table(&g, 0.7).unwrap();
        let o = orbit(1.3, 0.7, 1).unwrap();
        let d = build_d(&tab, &o);
        assert_eq!(d.rows.len(), 5);
        assert_eq!(d.n_cols, o.big_k + 2);
        assert_eq!(d.rows[0].col_offset, 0);
        assert_eq!(d.rows[1].col_offset, 0);
        let dense = d.to_dense();
        for (i, r) in d.rows.iter().enumerate() {
            for j in 0..d.n_cols {
                let inside = j >= r.col_offset && j < r.col_offset + 2;
                assert_eq!(dense[(i, j)] != C64::new(0.0, 0.0), inside);
            }
        }
    }

    #[test]
    fn n1_window_found() {
        let g = RationalWindow::real(&[1.0], &[-1.0]).unwrap();
        let tab = multiplier_table(&g, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let w = full_rank_window(&tab, 3, 64).unwrap();
        assert!(w.sigma_min > 0.5);
    }

    #[test]
    fn window_stable_under_half_delta() {
        let g = RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let alpha = std::f64::consts::FRAC_1_SQRT_2;
        let tab = multiplier_table(&g, alpha).unwrap();
        let w = full_rank_window(&tab, 6, 256).unwrap();
        assert!(w.sigma_min > 0.0);
        for f in [-0.5, 0.5] {
            let o = orbit(w.xi_hat + f * w.delta, alpha, w.l).unwrap();
            let m = normalized_dense(&build_d(&tab, &o));
            assert!(selected_sigma(&m, &w.rows) >= 0.5 * w.sigma_min);
        }
    }

    #[test]
    fn column_top_matches_values() {
        for alpha in [0.7, 0.45, 0.23] {
            for c in -20..20 {
                let vals = column_values(alpha, 1.17, c);
                let top = vals.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
                assert!((column_top(alpha, 1.17, c) - top).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m0_examples() {
        let tab = multiplier_table(&RationalWindow::real(&[1.0], &[1.0]).unwrap(), 0.7).unwrap();
        let c = m0_nonvanishing(&tab).unwrap();
        assert!(c.ok && (c.min_abs - 1.0).abs() < 1e-12);
        assert!(c.lower_bound > 0.9 && c.lower_bound <= c.min_abs);
        let tab = multiplier_table(&RationalWindow::real(&[1.0, -1.0], &[2.0, 1.0]).unwrap(), 0.7).unwrap();
        let c = m0_nonvanishing(&tab).unwrap();
        assert!(c.ok && c.eps > 0.0);
        let tab = multiplier_table(&RationalWindow::real(&[1.0, -2.0], &[2.0, 1.0]).unwrap(), 0.7).unwrap();
        let c = m0_nonvanishing(&tab).unwrap();
        assert!(!c.ok);
        let z = c.zero_at.unwrap();
        assert!((z - 2f64.ln() / TWO_PI).abs() < 1e-8);
    }

    #[test]
    fn irrational_rejects_rational() {
        let g = RationalWindow::real(&[1.0, -0.5], &[-1.0, -2.0]).unwrap();
        assert_eq!(
            certify_irrational(&g, &Lattice::new(6.0 / 7.0, 1.0).unwrap()),
            Err(Error::EffectivelyRational { p: 6, q: 7 })
        );
    }
}
