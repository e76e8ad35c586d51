//! Numerical kernels shared by the certifiers.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const LANCZOS_STEPS: usize = 40;
const LANCZOS_RESTARTS: usize = 50;

/// A sparse row: entries `vals` placed at columns `start, start+1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRow {
    pub start: usize,
    pub vals: Vec<C64>,
}

/// Upper-triangular factor of a banded least-squares matrix, built by Givens rotations.
#[derive(Debug, Clone)]
pub struct BandedR {
    ncols: usize,
    bw: usize,
    rows: Vec<Option<Vec<C64>>>,
}

impl BandedR {
    /// Factor the matrix with the given rows and `ncols` columns.
    ///
    /// Entries at columns `>= ncols` must already be removed. Columns are processed
    /// left to right; rows still active at column `c` live in `[c, c+bw)`, so at most
    /// `bw` of them are linearly independent and the rest are compressed away.
    pub fn factor(ncols: usize, rows: &[BandRow]) -> Self {
        let bw = rows.iter().map(|r| r.vals.len()).max().unwrap_or(1).max(1);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| rows[i].start);
        let mut r: Vec<Option<Vec<C64>>> = vec![None; ncols];
        let mut active: Vec<Vec<C64>> = Vec::new();
        let mut next = 0;
        for (c, slot) in r.iter_mut().enumerate() {
            while next < order.len() && rows[order[next]].start == c {
                let row = &rows[order[next]];
                debug_assert!(row.start + row.vals.len() <= ncols);
                let mut x = vec![ZERO; bw];
                x[..row.vals.len()].copy_from_slice(&row.vals);
                active.push(x);
                next += 1;
            }
            if active.is_empty() {
                continue;
            }
            // Givens elimination of the active block to upper-trapezoidal form.
            let k = active.len();
            for j in 0..bw.min(k) {
                for i in j + 1..k {
                    if active[i][j] == ZERO {
                        continue;
                    }
                    let (cs, sn) = givens(active[j][j], active[i][j]);
                    let (top, bot) = active.split_at_mut(i);
                    let (a, b) = (&mut top[j], &mut bot[0]);
                    for t in j..bw {
                        let (u, v) = (a[t], b[t]);
                        a[t] = u * cs + sn * v;
                        b[t] = v * cs - sn.conj() * u;
                    }
                    b[j] = ZERO;
                }
            }
            active.truncate(bw);
            let head = active.remove(0);
            if head[0] != ZERO {
                *slot = Some(head);
            } else if head.iter().any(|v| *v != ZERO) {
                active.insert(0, head);
            }
            for x in active.iter_mut() {
                x.rotate_left(1);
                x[bw - 1] = ZERO;
            }
            active.retain(|x| x.iter().any(|v| *v != ZERO));
        }
        BandedR { ncols, bw, rows: r }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// `z = (RᴴR)⁻¹ x`; `None` when a triangular solve overflows.
    fn apply_inverse(&self, rr: &[&Vec<C64>], x: &[C64], y: &mut [C64], z: &mut [C64]) -> Option<()> {
        let n = self.ncols;
        let bw = self.bw;
        for i in 0..n {
            let mut acc = x[i];
            let lo = i.saturating_sub(bw - 1);
            for j in lo..i {
                acc -= rr[j][i - j].conj() * y[j];
            }
            y[i] = acc / rr[i][0].conj();
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            let hi = (i + bw).min(n);
            for j in i + 1..hi {
                acc -= rr[i][j - i] * z[j];
            }
            z[i] = acc / rr[i][0];
        }
        z.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(())
    }

    /// Smallest singular value: restarted Lanczos on `(RᴴR)⁻¹`.
    pub fn sigma_min(&self) -> f64 {
        let n = self.ncols;
        if n == 0 {
            return f64::INFINITY;
        }
        let diag_ok = self.rows.iter().all(|r| matches!(r, Some(v) if v[0] != ZERO));
        if !diag_ok {
            return 0.0;
        }
        let rr: Vec<&Vec<C64>> = self.rows.iter().map(|r| r.as_ref().unwrap()).collect();
        let mut x: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 + 0.5 * ((i as f64) * 0.754877).sin(), 0.3 * ((i as f64) * 1.3247).cos()))
            .collect();
        normalize(&mut x);
        let mut y = vec![ZERO; n];
        let steps = LANCZOS_STEPS.min(n);
        let mut lam_prev = 0.0;
        let mut lam = 0.0;
        for _ in 0..LANCZOS_RESTARTS {
            let mut basis: Vec<Vec<C64>> = vec![x.clone()];
            let mut alpha = Vec::with_capacity(steps);
            let mut beta: Vec<f64> = Vec::with_capacity(steps);
            let mut z = vec![ZERO; n];
            for k in 0..steps {
                if self.apply_inverse(&rr, &basis[k], &mut y, &mut z).is_none() {
                    return 0.0;
                }
                let a: f64 = basis[k].iter().zip(&z).map(|(b, v)| (b.conj() * v).re).sum();
                alpha.push(a);
                // Full reorthogonalization (modified Gram–Schmidt).
                for b in &basis {
                    let d: C64 = b.iter().zip(&z).map(|(p, q)| p.conj() * q).sum();
                    z.iter_mut().zip(b).for_each(|(q, p)| *q -= d * p);
                }
                let nb = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if k + 1 == steps || nb <= 1e-14 * a.abs() {
                    break;
                }
                beta.push(nb);
                basis.push(z.iter().map(|v| v / nb).collect());
            }
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = t.symmetric_eigen();
            let (imax, &lmax) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            lam = lmax;
            if !lam.is_finite() || lam <= 0.0 {
                return 0.0;
            }
            let v = eig.eigenvectors.column(imax);
            x = vec![ZERO; n];
            for (b, c) in basis.iter().zip(v.iter()) {
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += bi * *c);
            }
            normalize(&mut x);
            if (lam - lam_prev).abs() <= 1e-9 * lam || m < steps {
                break;
            }
            lam_prev = lam;
        }
        1.0 / lam.sqrt()
    }
}

fn normalize(x: &mut [C64]) {
    let n = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Complex Givens pair `(c, s)` with `c` real, mapping `(a, b)` to `(r, 0)`.
pub fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Smallest singular value of a banded matrix given by rows.
pub fn banded_sigma_min(ncols: usize, rows: &[BandRow]) -> f64 {
    BandedR::factor(ncols, rows).sigma_min()
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Determinant as `(ln|det|, det/|det|)`, with rows and columns equilibrated
/// so that entries of very different magnitude do not overflow the product.
pub fn log_det(m: &DMatrix<C64>) -> (f64, C64) {
    let mut a = m.clone();
    let mut log = 0.0;
    for mut col in a.column_iter_mut() {
        let s = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if s == 0.0 {
            return (f64::NEG_INFINITY, C64::new(0.0, 0.0));
        }
        col /= C64::new(s, 0.0);
        log += s.ln();
    }
    for mut row in a.row_iter_mut() {
        let s = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if s == 0.0 {
            return (f64::NEG_INFINITY, C64::new(0.0, 0.0));
        }
        row /= C64::new(s, 0.0);
        log += s.ln();
    }
    let lu = a.lu();
    let mut phase = C64::new(if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 }, 0.0);
    for d in lu.u().diagonal().iter() {
        let r = d.norm();
        if r == 0.0 {
            return (f64::NEG_INFINITY, C64::new(0.0, 0.0));
        }
        log += r.ln();
        phase *= d / r;
    }
    (log, phase)
}

/// `|x − y|/max(|x|, |y|)` for values given as `(ln|·|, phase)`.
pub fn log_relative_gap(x: (f64, C64), y: (f64, C64)) -> f64 {
    let top = x.0.max(y.0);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    (x.1 * (x.0 - top).exp() - y.1 * (y.0 - top).exp()).norm()
}

/// Spectral norm `‖m‖₂`.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a matrix with at least as many rows as columns.
pub fn dense_sigma_min(m: &DMatrix<C64>) -> f64 {
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Unit vector spanning the (numerically) smallest right singular direction,
/// with the singular values of `m`.
pub fn null_vector(m: &DMatrix<C64>) -> (Vec<C64>, Vec<f64>) {
    let n = m.ncols();
    // Pad to square so that V is complete when rows < columns.
    let mut sq = DMatrix::<C64>::zeros(m.nrows().max(n), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let (imin, _) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let mut v: Vec<C64> = (0..n).map(|j| vt[(imin, j)].conj()).collect();
    // Fix the phase: largest component real positive.
    let (jmax, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonempty");
    let ph = v[jmax] / v[jmax].norm();
    v.iter_mut().for_each(|x| *x /= ph);
    let mut sorted = sv;
    sorted.sort_by(|a, b| b.total_cmp(a));
    (v, sorted)
}

/// Horner evaluation of `Σ c_j zʲ` (ascending coefficients).
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Winding number of `f` around 0 along the circle `|z − center| = radius`.
///
/// Returns `None` when `f` vanishes on a sample point or the sampling cannot
/// resolve the phase within `2^18` points.
pub fn winding_number<F: Fn(C64) -> C64>(f: F, center: C64, radius: f64) -> Option<f64> {
    let mut n = 256usize;
    loop {
        let vals: Vec<C64> = (0..n)
            .map(|j| {
                let th = crate::TWO_PI * j as f64 / n as f64;
                f(center + C64::from_polar(radius, th))
            })
            .collect();
        if vals.iter().any(|v| v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite()) {
            return None;
        }
        let mut total = 0.0;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let d = (vals[(j + 1) % n] / vals[j]).arg();
            worst = worst.max(d.abs());
            total += d;
        }
        if worst < 0.5 {
            return Some(total / crate::TWO_PI);
        }
        if n >= 1 << 18 {
            return None;
        }
        n *= 2;
    }
}

/// First continued-fraction convergent `p/q` of `x` with `q ≤ q_max` and `|x − p/q| ≤ tol`.
pub fn rational_approximation(x: f64, q_max: i64, tol: f64) -> Option<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let p2 = ai.checked_mul(p1)?.checked_add(p0)?;
        let q2 = ai.checked_mul(q1)?.checked_add(q0)?;
        if q2 > q_max {
            return None;
        }
        if (x - p2 as f64 / q2 as f64).abs() <= tol {
            return Some((p2, q2));
        }
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gl8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, w)| w * f(m + h * x)).sum::<f64>() * h
}

/// Adaptive Gauss–Legendre quadrature with relative tolerance `rtol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, rtol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let l = gl8(f, a, m);
        let r = gl8(f, m, b);
        let both = l + r;
        if depth >= 40 || (both - whole).abs() <= rtol * both.abs().max(f64::MIN_POSITIVE) {
            return both;
        }
        rec(f, a, m, l, rtol, depth + 1) + rec(f, m, b, r, rtol, depth + 1)
    }
    if b <= a {
        return 0.0;
    }
    let whole = gl8(&f, a, b);
    rec(&f, a, b, whole, rtol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_of(ncols: usize, rows: &[BandRow]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.vals.iter().enumerate() {
                m[(i, r.start + j)] = *v;
            }
        }
        m
    }

    #[test]
    fn banded_matches_dense_svd() {
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for trial in 0..20 {
            let bw = 1 + trial % 4;
            let ncols = 30;
            let mut rows = Vec::new();
            for start in 0..=ncols - bw {
                for _ in 0..(1 + trial % 2) {
                    rows.push(BandRow {
                        start,
                        vals: (0..bw).map(|_| C64::new(rnd(), rnd())).collect(),
                    });
                }
            }
            for s in ncols - bw + 1..ncols {
                rows.push(BandRow {
                    start: s,
                    vals: (0..ncols - s).map(|_| C64::new(rnd(), rnd())).collect(),
                });
            }
            let dense = dense_sigma_min(&dense_of(ncols, &rows));
            let banded = banded_sigma_min(ncols, &rows);
            assert!((dense - banded).abs() < 1e-8 * dense.max(1e-3), "{dense} vs {banded}");
        }
    }

    #[test]
    fn uncovered_column_gives_zero() {
        let rows = vec![BandRow { start: 0, vals: vec![C64::new(1.0, 0.0)] }];
        assert_eq!(banded_sigma_min(2, &rows), 0.0);
    }

    #[test]
    fn winding_counts_roots() {
        let p = [C64::new(0.06, 0.0), C64::new(-0.5, 0.0), C64::new(1.0, 0.0)];
        // roots 0.2 and 0.3
        let w = winding_number(|z| poly_eval(&p, z), ZERO, 1.0).unwrap();
        assert!((w - 2.0).abs() < 1e-9);
        let w = winding_number(|z| poly_eval(&p, z), ZERO, 0.25).unwrap();
        assert!((w - 1.0).abs() < 1e-9);
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(rational_approximation(6.0 / 7.0, 64, 1e-9), Some((6, 7)));
        assert_eq!(rational_approximation(0.6, 64, 1e-9), Some((3, 5)));
        assert_eq!(rational_approximation(std::f64::consts::FRAC_1_SQRT_2, 64, 1e-9), None);
        assert_eq!(rational_approximation(0.5, 64, 1e-9), Some((1, 2)));
    }

    #[test]
    fn quadrature() {
        let v = integrate(|x| (4.0 * std::f64::consts::PI * x).exp(), 0.0, 1.0, 1e-13);
        let want = ((4.0 * std::f64::consts::PI).exp() - 1.0) / (4.0 * std::f64::consts::PI);
        assert!((v - want).abs() < 1e-11 * want);
    }

    #[test]
    fn null_vector_of_rank_deficient() {
        let m = DMatrix::from_row_slice(2, 3, &[
            C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0),
            C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let (v, _) = null_vector(&m);
        let r = &m * nalgebra::DVector::from_vec(v);
        assert!(r.norm() < 1e-12);
    }
}
