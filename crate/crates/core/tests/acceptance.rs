//! End-to-end acceptance checks, one line per criterion.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use gabor_rational::constructions::*;
use gabor_rational::density::det_b_factorization;
use gabor_rational::herglotz::{certify_herglotz, contraction_norm, frobenius_matrix, verify_contraction, InterlacingSpec};
use gabor_rational::linalg::spectral_norm;
use gabor_rational::multipliers::{identity_residuals, multiplier_table};
use gabor_rational::oracle::{lower_bound_estimate, Orientation, WitnessSpec};
use gabor_rational::orbit::certify_irrational;
use gabor_rational::report::Certificate;
use gabor_rational::sis::sampling_experiment;
use gabor_rational::zak::critical_density_check;
use gabor_rational::*;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = (bool, String);

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Random window with distinct real parts of the poles.
fn random_window(rng: &mut StdRng, n: usize) -> RationalWindow {
    loop {
        let a: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let w: Vec<C64> = (0..n)
            .map(|_| {
                let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                C64::new(s * rng.random_range(0.2..2.0), rng.random_range(-3.0..3.0))
            })
            .collect();
        if let Ok(g) = RationalWindow::new(&a, &w) {
            let re: Vec<f64> = g.w().iter().map(|w| w.re).collect();
            if re.windows(2).all(|p| p[1] - p[0] > 0.05) && a.iter().all(|x| x.norm() > 0.1) {
                return g;
            }
        }
    }
}

fn c1_roots() -> Outcome {
    let roots = obstruction_roots(OBSTRUCTION_ALPHA).unwrap();
    let poly = obstruction_polynomial();
    let near = |t: C64| roots.iter().copied().min_by(|a, b| (a - t).norm().total_cmp(&(b - t).norm())).unwrap();
    let e_plus = near(cr((1.0f64 / 6.0).exp()));
    let e_minus = near(cr((-1.0f64 / 6.0).exp()));
    let sym_ok = (e_plus.re - (1.0f64 / 6.0).exp()).abs() < 1e-10
        && (e_minus.re - (-1.0f64 / 6.0).exp()).abs() < 1e-10
        && relative_residual(&poly, e_plus) < 1e-10
        && relative_residual(&poly, e_minus) < 1e-10;
    let z3 = near(cr(-1.12));
    let z4 = near(cr(-0.89));
    let neg_ok = z3.im.abs() < 1e-10 && z4.im.abs() < 1e-10 && (z3.re + 1.12).abs() < 0.01 && (z4.re + 0.89).abs() < 0.01;
    let w3 = pole_from_root(z3, OBSTRUCTION_ALPHA);
    let w4 = pole_from_root(z4, OBSTRUCTION_ALPHA);
    let w_ok = (w3.re - 0.108).abs() < 5e-3 && (w4.re + 0.111).abs() < 5e-3;
    (
        sym_ok && neg_ok && w_ok,
        format!("z3={:.4} z4={:.4} Re w1={:.4},{:.4}", z3.re, z4.re, w3.re, w4.re),
    )
}

fn c2_identities() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let (mut gen, mut res) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let g = random_window(&mut rng, n);
        let alpha = rng.random_range(0.2..0.95);
        let tab = multiplier_table(&g, alpha).unwrap();
        let mut done = 0;
        while done < 10 {
            let z = C64::from_polar(rng.random_range(0.05..1.5), rng.random_range(0.0..TWO_PI));
            let xi = rng.random_range(-1.0..1.0);
            if let Ok(r) = identity_residuals(&tab, z, xi) {
                gen = gen.max(r.r_gen);
                res = r.r_res.iter().copied().fold(res, f64::max);
                done += 1;
            }
        }
    }
    (gen < 1e-9 && res < 1e-9, format!("max generating {gen:.2e}, max residue {res:.2e}"))
}

fn c3_contraction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let (mut worst_step, mut worst_prod) = (0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let mu = loop {
            let mut m: Vec<f64> = (0..=n).map(|_| rng.random_range(0.01..0.99)).collect();
            m.sort_by(|a, b| b.total_cmp(a));
            if m.windows(2).all(|p| (p[0] - p[1]) / m[0] > 1e-3) {
                break m;
            }
        };
        let cn = contraction_norm(&InterlacingSpec::new(mu.clone()).unwrap()).unwrap();
        let c = cn.product_constant();
        let len = rng.random_range(1..=50);
        let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut prod = DMatrix::<f64>::identity(n, n);
        for m in 1..=len {
            let l = rng.random_range(0..=n);
            let (lhs, rhs) = verify_contraction(&cn, l, &q);
            worst_step = worst_step.max(lhs / rhs);
            ok &= lhs <= rhs * (1.0 + 1e-9);
            q = gabor_rational::herglotz::shift_mod(&q, &cn.vertex_poly(l));
            prod = frobenius_matrix(&cn.vertex_poly(l)).unwrap() * prod;
            let ratio = spectral_norm(&prod.map(cr)) / (c * mu[0].powi(m as i32));
            worst_prod = worst_prod.max(ratio);
            ok &= ratio <= 1.0 + 1e-9;
        }
    }
    (ok, format!("max step ratio {worst_step:.6}, max product/(C mu1^m) {worst_prod:.6}"))
}

fn c4_herglotz() -> Outcome {
    let g = RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [0.3, 0.7, 0.99, 1.0] {
        let lat = Lattice::new(alpha, 1.0).unwrap();
        let rep = certify_herglotz(&g, &lat);
        let frame = matches!(&rep, Ok(r) if r.verdict == Verdict::FrameCertified);
        let est = lower_bound_estimate(&g, &lat, &[200, 400]).unwrap();
        let (a200, a400) = (est.per_size[0].interior_min_sq, est.per_size[1].interior_min_sq);
        let stable = a400 > 0.0 && (a200 - a400).abs() <= 0.1 * a400;
        ok &= frame && stable;
        detail.push(format!("a={alpha}: {} rel.change {:.2e}", if frame { "frame" } else { "no" }, (a200 - a400).abs() / a400));
    }
    (ok, detail.join("; "))
}

fn c5_determinant() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let g = random_window(&mut rng, n);
        let alpha = rng.random_range(0.05..1.0 / n as f64);
        let tab = multiplier_table(&g, alpha).unwrap();
        let theta = (n - 1) as f64 + rng.random_range(0.0..3.0);
        worst = worst.max(det_b_factorization(&tab, theta).unwrap().residual);
    }
    let g2 = RationalWindow::real(&[1.0, -0.7], &[0.6, -1.3]).unwrap();
    let tab = multiplier_table(&g2, 0.4).unwrap();
    let f = det_b_factorization(&tab, 1.5).unwrap();
    let u = tab.u();
    let dy = (f.det_y - (u[1] - u[0])).norm() / (u[1] - u[0]).norm();
    (worst < 1e-9 && dy < 1e-12, format!("max detB residual {worst:.2e}, N=2 detY residual {dy:.2e}"))
}

fn c6_nfprop() -> Outcome {
    let nf = nfprop_window(&[cr(1.0), cr(2.0), cr(3.0)], None).unwrap();
    let res = nf.residuals.iter().copied().fold(0.0, f64::max);
    let est = lower_bound_estimate(&nf.window, &Lattice::new(0.5, 1.0).unwrap(), &[100, 400]).unwrap();
    let drop = est.per_size[0].interior_min_sq / est.per_size[1].interior_min_sq;
    (res < 1e-10 && drop >= 10.0, format!("row residual {res:.2e}, A_est(100)/A_est(400) = {drop:.1}"))
}

fn c7_witness() -> Outcome {
    let roots = obstruction_roots(OBSTRUCTION_ALPHA).unwrap();
    let ob = degree3_window(OBSTRUCTION_ALPHA, branch_near(&roots, cr(-1.12)), 0.95).unwrap();
    let lat = Lattice::new(OBSTRUCTION_ALPHA, 1.0).unwrap();
    let w = WitnessSpec::evaluate(&ob.window, &lat, ob.witness_center(), &[0.02, 0.01, 0.005], Orientation::Reflected).unwrap();
    let ok = w.quotients.iter().all(|q| (0.2..=0.35).contains(q));
    (ok, format!("quotients {:?}", w.quotients.iter().map(|q| format!("{q:.4}")).collect::<Vec<_>>()))
}

fn c8_irrational() -> Outcome {
    let g = RationalWindow::real(&[1.0, -0.5], &[-1.0, -2.0]).unwrap();
    let lat = Lattice::new(FRAC_1_SQRT_2, 1.0).unwrap();
    let rep = certify_irrational(&g, &lat).unwrap();
    let a_crit = rep.a_crit.unwrap_or(0.0);
    let est = lower_bound_estimate(&g, &lat, &[200, 400]).unwrap();
    let ratio = est.a_est / a_crit;
    let ok = rep.verdict == Verdict::FrameCertified && a_crit > 0.0 && (1.0 / 3.0..=3.0).contains(&ratio);
    (ok, format!("A_crit {a_crit:.4e}, oracle A_est {:.4e}, ratio {ratio:.3}", est.a_est))
}

fn c9_critical() -> Outcome {
    let cases = [
        (RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), Lattice::new(1.0, 1.0).unwrap()),
        (RationalWindow::real(&[1.0, 2.0, 0.5], &[0.5, 1.0, 3.0]).unwrap(), Lattice::new(1.0, 1.0).unwrap()),
        (RationalWindow::real(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), Lattice::new(2.0, 0.5).unwrap()),
    ];
    let mut ok = true;
    let mut mins = Vec::new();
    for (g, lat) in &cases {
        let rep = critical_density_check(g, lat).unwrap();
        let Certificate::Critical(c) = &rep.certificate else { return (false, "wrong certificate".into()) };
        ok &= rep.verdict == Verdict::FrameCertified && c.min_modulus > 0.0;
        mins.push(format!("{:.3e}", c.min_modulus));
    }
    (ok, format!("min|Z| {}", mins.join(", ")))
}

fn c10_sis() -> Outcome {
    let g = RationalWindow::real(&[1.0, -1.0], &[1.0, 2.0]).unwrap();
    let e64 = sampling_experiment(&g, FRAC_1_SQRT_2, 100, 64, 10).unwrap();
    let e128 = sampling_experiment(&g, FRAC_1_SQRT_2, 100, 128, 10).unwrap();
    let ratio = e64.a_emp / e128.a_emp;
    let bound = e128.amalgam_bound.unwrap();
    let ok = e128.a_emp > 0.0 && (0.5..=2.0).contains(&ratio) && e64.b_emp < bound && e128.b_emp < bound;
    (ok, format!("A_emp 64/128 = {ratio:.3}, B_emp {:.3e} < bound {bound:.3e}", e128.b_emp))
}

fn main() {
    let checks: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("obstruction roots", c1_roots, Some(Duration::from_secs(1))),
        ("identity suite", c2_identities, Some(Duration::from_secs(10))),
        ("contraction lemma", c3_contraction, Some(Duration::from_secs(30))),
        ("herglotz end-to-end", c4_herglotz, None),
        ("determinant factorization", c5_determinant, None),
        ("nfprop failure", c6_nfprop, None),
        ("witness decay", c7_witness, None),
        ("irrational vs oracle", c8_irrational, None),
        ("critical density", c9_critical, None),
        ("sis experiment", c10_sis, None),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in checks.iter().enumerate() {
        let t = Instant::now();
        let (mut ok, detail) = f();
        let el = t.elapsed();
        if let Some(l) = limit {
            ok &= el <= *l;
        }
        println!("criterion {:>2} {:<26} {} ({:.2}s) {}", i + 1, name, if ok { "PASS" } else { "FAIL" }, el.as_secs_f64(), detail);
        failed += usize::from(!ok);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
