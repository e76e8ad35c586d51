//! Command-line front end: window files, certifier dispatch, sweeps and reports.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{branch_near, degree3_window, nfprop_window, obstruction_roots, OBSTRUCTION_ALPHA};
use crate::density::certify_high_density;
use crate::error::{Error, Result};
use crate::herglotz::certify_herglotz;
use crate::linalg::rational_approximation;
use crate::multipliers::{identity_residuals, multiplier_table};
use crate::oracle::{lower_bound_estimate, Orientation, WitnessSpec, MIN_SECTION_ALPHA};
use crate::orbit::{certify_irrational, Q_MAX, RATIONAL_TOL};
use crate::report::{Certificate, CertificationReport, Method, Verdict};
use crate::sis::sampling_experiment;
use crate::window::{rescale_to_unit_beta, Lattice, RawWindow, RationalWindow};
use crate::zak::{certify_near_critical, critical_density_check};
use crate::C64;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "GABOR_THREADS";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Section sizes of the oracle cross-check.
pub const CROSS_CHECK_SIZES: [usize; 2] = [64, 128];
/// Probe half-widths written with a degree-3 witness.
pub const WITNESS_DELTAS: [f64; 3] = [0.02, 0.01, 0.005];

/// Window file: `{"a": [[re, im], ...], "w": [...], "witness": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowFile {
    #[serde(flatten)]
    pub raw: RawWindow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSpec>,
}

impl WindowFile {
    pub fn from_window(g: &RationalWindow) -> Self {
        WindowFile { raw: g.clone().into(), alpha: None, beta: None, witness: None }
    }

    pub fn window(&self) -> Result<RationalWindow> {
        RationalWindow::try_from(self.raw.clone())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window: WindowFile,
    pub lattice: Lattice,
    pub method: Method,
    /// Relative tolerance for witness replay.
    pub tol: f64,
    pub cross_check: bool,
}

impl PartialEq for WindowFile {
    fn eq(&self, other: &Self) -> bool {
        self.raw.a == other.raw.a && self.raw.w == other.raw.w && self.witness == other.witness
    }
}

/// Serialized report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub window: RationalWindow,
    pub lattice: Lattice,
    pub normalized_alpha: f64,
    #[serde(flatten)]
    pub report: CertificationReport,
    pub version: String,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.report.verdict.exit_code()
    }
}

/// Exit code for an error: 3 for malformed input, 2 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_input() {
        3
    } else {
        2
    }
}

fn run_method(g: &RationalWindow, lat: &Lattice, method: Method) -> Result<CertificationReport> {
    match method {
        Method::Herglotz => certify_herglotz(g, lat),
        Method::Irrational => certify_irrational(g, lat),
        Method::HighDensity => certify_high_density(g, lat),
        Method::NearCritical => certify_near_critical(g, lat),
        Method::Critical => critical_density_check(g, lat),
        Method::DensityObstruction => density_obstruction(lat),
        Method::Oracle => {
            let est = lower_bound_estimate(g, lat, &CROSS_CHECK_SIZES)?;
            let mut rep = CertificationReport::new(Verdict::Inconclusive, Method::Oracle, Certificate::Oracle(est));
            rep.diag("reason", "finite sections estimate but do not certify");
            Ok(rep)
        }
        Method::Auto | Method::Counterexample | Method::Sis | Method::Identities => {
            Err(Error::Input(format!("method {} is not a certifier", method.as_str())))
        }
    }
}

fn density_obstruction(lat: &Lattice) -> Result<CertificationReport> {
    let ab = lat.normalized_alpha();
    if ab <= 1.0 + 1e-12 {
        return Err(Error::DensityTooLow { density: lat.density() });
    }
    let mut rep =
        CertificationReport::new(Verdict::NotFrameWitnessed, Method::DensityObstruction, Certificate::DensityObstruction { alpha_beta: ab });
    rep.diag("reason", "alpha*beta > 1");
    Ok(rep)
}

/// Routing order for `auto`.
pub fn route(g: &RationalWindow, lat: &Lattice) -> Vec<Method> {
    let ab = lat.normalized_alpha();
    if ab > 1.0 + 1e-12 {
        return vec![Method::DensityObstruction];
    }
    if (ab - 1.0).abs() <= 1e-12 {
        return vec![Method::Critical];
    }
    let mut out = Vec::new();
    if g.class().herglotz {
        out.push(Method::Herglotz);
    }
    if ab <= 1.0 / g.len() as f64 + 1e-12 {
        out.push(Method::HighDensity);
    }
    if rational_approximation(ab, Q_MAX, RATIONAL_TOL).is_none() {
        out.push(Method::Irrational);
    }
    out.push(Method::NearCritical);
    out
}

/// Replay a stored witness; `Some` when every stored ratio reproduces within `tol`.
fn replay_witness(g: &RationalWindow, lat: &Lattice, w: &WitnessSpec, tol: f64) -> Result<Option<CertificationReport>> {
    let fresh = WitnessSpec::evaluate(g, lat, w.center, &w.deltas, w.orientation)?;
    let drift = fresh
        .ratios
        .iter()
        .zip(&w.ratios)
        .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if fresh.ratios.len() != w.ratios.len() || drift > tol || !fresh.decays() {
        return Ok(None);
    }
    let mut rep = CertificationReport::new(Verdict::NotFrameWitnessed, Method::Counterexample, Certificate::Witness(fresh));
    rep.diag("witness_replay_drift", drift);
    Ok(Some(rep))
}

fn cross_check(g: &RationalWindow, lat: &Lattice, rep: &mut CertificationReport) {
    let ab = lat.normalized_alpha();
    if !(ab > MIN_SECTION_ALPHA && ab < 1.0 - 1e-12) {
        return;
    }
    match lower_bound_estimate(g, lat, &CROSS_CHECK_SIZES) {
        Ok(est) => {
            rep.diag("oracle_A_est", est.a_est);
            rep.diag("oracle_convergence", est.convergence);
        }
        Err(e) => {
            rep.diag("oracle_error", e.to_string());
        }
    }
}

/// Certify one window on one lattice.
pub fn run_certify(cfg: &RunConfig) -> Result<RunReport> {
    let g = cfg.window.window()?;
    let lat = cfg.lattice;
    let mut attempts: Vec<(Method, Result<CertificationReport>)> = Vec::new();
    let methods = if cfg.method == Method::Auto { route(&g, &lat) } else { vec![cfg.method] };
    for m in methods {
        let r = run_method(&g, &lat, m);
        if let Err(e) = &r {
            if e.is_input() {
                return Err(e.clone());
            }
        }
        let decided = matches!(&r, Ok(rep) if rep.verdict != Verdict::Inconclusive);
        attempts.push((m, r));
        if decided {
            break;
        }
    }
    let witness = match &cfg.window.witness {
        Some(w) => replay_witness(&g, &lat, w, cfg.tol)?,
        None => None,
    };
    let decided = attempts.iter().find_map(|(_, r)| r.as_ref().ok().filter(|rep| rep.verdict != Verdict::Inconclusive));
    let mut report = match (decided, witness) {
        (Some(rep), Some(wit)) if rep.verdict == Verdict::FrameCertified => {
            let dump = serde_json::json!({ "certifier": rep, "witness": wit });
            return Err(Error::Conflict(dump.to_string()));
        }
        (_, Some(wit)) => wit,
        (Some(rep), None) => rep.clone(),
        (None, None) => {
            let method = attempts.last().map(|a| a.0).unwrap_or(cfg.method);
            let mut rep = match attempts.last() {
                Some((_, Ok(rep))) => rep.clone(),
                _ => CertificationReport::new(Verdict::Inconclusive, method, Certificate::None),
            };
            for (m, r) in &attempts {
                if let Err(e) = r {
                    rep.diag(&format!("{}_failed", m.as_str()), e.to_string());
                }
            }
            rep
        }
    };
    if cfg.cross_check {
        cross_check(&g, &lat, &mut report);
    }
    Ok(RunReport {
        window: g,
        lattice: lat,
        normalized_alpha: lat.normalized_alpha(),
        report,
        version: VERSION.to_string(),
    })
}

/// Inclusive range `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Input(format!("range {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        let r = match parts[..] {
            [v] => Range { start: v, stop: v, step: 1.0 },
            [start, stop, step] => Range { start, stop, step },
            _ => return Err(Error::Input(format!("range {s:?} is not start:stop:step"))),
        };
        if !(r.step > 0.0 && r.stop >= r.start && r.start.is_finite() && r.stop.is_finite()) {
            return Err(Error::Input(format!("range {s:?} is empty or has a nonpositive step")));
        }
        Ok(r)
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn csv_num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn csv_diag(rep: &CertificationReport) -> String {
    let text = serde_json::to_string(&rep.diagnostics).unwrap_or_default();
    text.replace(',', ";").replace('"', "")
}

/// Sweep over a grid, rows in row-major order (`alpha` outer, `beta` inner).
pub fn run_sweep(window: &WindowFile, alphas: &Range, betas: &Range, cross_check: bool) -> Result<String> {
    window.window()?;
    let cells: Vec<(f64, f64)> =
        alphas.values().into_iter().flat_map(|a| betas.values().into_iter().map(move |b| (a, b))).collect();
    let rows: Vec<String> = cells
        .par_iter()
        .map(|&(alpha, beta)| {
            let rep = Lattice::new(alpha, beta)
                .and_then(|lattice| {
                    run_certify(&RunConfig { window: window.clone(), lattice, method: Method::Auto, tol: 1e-9, cross_check })
                })
                .map(|r| r.report)
                .unwrap_or_else(|e| CertificationReport::inconclusive(Method::Auto, e.to_string()));
            format!(
                "{:.16e},{:.16e},{},{},{},{},{}",
                alpha,
                beta,
                rep.verdict.as_str(),
                rep.method.as_str(),
                csv_num(rep.a_crit),
                csv_num(rep.b_crit),
                csv_diag(&rep)
            )
        })
        .collect();
    let mut out = String::from("alpha,beta,verdict,method,A_crit,B_crit,diag\n");
    for r in rows {
        let _ = writeln!(out, "{r}");
    }
    Ok(out)
}

/// Maximum identity residuals over random `(z, ξ)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub alpha: f64,
    pub samples: usize,
    pub max_generating: f64,
    pub max_residue: f64,
}

pub fn run_identities(g: &RationalWindow, alpha: f64, samples: usize, seed: u64) -> Result<IdentityReport> {
    let tab = multiplier_table(g, alpha)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut gen, mut res) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < samples {
        let z = C64::from_polar(rng.random_range(0.05..0.95), rng.random_range(0.0..crate::TWO_PI));
        let xi = rng.random_range(-2.0..2.0);
        match identity_residuals(&tab, z, xi) {
            Ok(r) => {
                gen = gen.max(r.r_gen);
                res = r.r_res.iter().copied().fold(res, f64::max);
                done += 1;
            }
            Err(Error::PoleHit) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(IdentityReport { alpha, samples, max_generating: gen, max_residue: res })
}

/// Output of the `counterexample` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleOutput {
    pub verdict: Verdict,
    pub family: Family,
    pub window_file: WindowFile,
    pub construction: serde_json::Value,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nfprop,
    Degree3,
}

fn parse_poles(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            let (re, im) = match p.split_once('+') {
                Some((re, im)) => (re, im.trim_end_matches('i')),
                None => (p, "0"),
            };
            let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Input(format!("pole {p:?}: {e}")));
            Ok(C64::new(parse(re)?, parse(im)?))
        })
        .collect()
}

pub fn run_counterexample(family: Family, poles: &str, theta: Option<f64>, alpha: Option<f64>, xi0: f64) -> Result<CounterexampleOutput> {
    match family {
        Family::Nfprop => {
            let w = parse_poles(poles)?;
            let nf = nfprop_window(&w, theta)?;
            let ok = nf.residuals.iter().all(|r| *r < 1e-10);
            let mut file = WindowFile::from_window(&nf.window);
            file.alpha = Some(nf.alpha);
            file.beta = Some(1.0);
            Ok(CounterexampleOutput {
                verdict: if ok { Verdict::NotFrameWitnessed } else { Verdict::Inconclusive },
                family,
                window_file: file,
                construction: serde_json::to_value(&nf).map_err(|e| Error::Input(e.to_string()))?,
                version: VERSION.to_string(),
            })
        }
        Family::Degree3 => {
            let alpha = alpha.unwrap_or(OBSTRUCTION_ALPHA);
            let roots = obstruction_roots(alpha)?;
            let branch = branch_near(&roots, C64::new(-1.12, 0.0));
            let ob = degree3_window(alpha, branch, xi0)?;
            let lat = Lattice::new(alpha, 1.0)?;
            let witness = WitnessSpec::evaluate(&ob.window, &lat, ob.witness_center(), &WITNESS_DELTAS, Orientation::Reflected)?;
            let ok = witness.decays();
            let mut file = WindowFile::from_window(&ob.window);
            file.alpha = Some(alpha);
            file.beta = Some(1.0);
            file.witness = Some(witness);
            Ok(CounterexampleOutput {
                verdict: if ok { Verdict::NotFrameWitnessed } else { Verdict::Inconclusive },
                family,
                window_file: file,
                construction: serde_json::to_value(&ob).map_err(|e| Error::Input(e.to_string()))?,
                version: VERSION.to_string(),
            })
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gaborcert", version, about = "Frame certification for Gabor systems with rational windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify one window on one lattice.
    Certify {
        #[arg(long)]
        window: PathBuf,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Relative tolerance for witness replay.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the finite-section cross-check.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Certify over an `alpha × beta` grid and write CSV.
    Sweep {
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        alpha_range: String,
        #[arg(long)]
        beta_range: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Construct a non-frame window.
    Counterexample {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated poles, `re` or `re+imi`.
        #[arg(long, default_value = "1,2,3")]
        poles: String,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = crate::constructions::DEFAULT_XI0)]
        xi0: f64,
        /// Write the window file (with witness) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the multiplier identities on random samples.
    Identities {
        #[arg(long)]
        window: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sampling experiment on `αℤ` in the shift-invariant space.
    Sis {
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        taps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Input(e.to_string()))
}

/// Size the global thread pool from `GABOR_THREADS`.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Certify { window, lattice, method, tol, out, no_oracle } => {
            let file = WindowFile::load(&window)?;
            let alpha = lattice.alpha.or(file.alpha).ok_or_else(|| Error::Input("--alpha is required".into()))?;
            let beta = lattice.beta.or(file.beta).unwrap_or(1.0);
            let cfg = RunConfig { window: file, lattice: Lattice::new(alpha, beta)?, method, tol, cross_check: !no_oracle };
            let rep = run_certify(&cfg)?;
            write_output(out.as_deref(), &to_json(&rep)?)?;
            Ok(rep.exit_code())
        }
        Command::Sweep { window, alpha_range, beta_range, out, no_oracle } => {
            let file = WindowFile::load(&window)?;
            let csv = run_sweep(&file, &Range::parse(&alpha_range)?, &Range::parse(&beta_range)?, !no_oracle)?;
            match out {
                Some(p) => std::fs::write(&p, csv).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Counterexample { family, poles, theta, alpha, xi0, out } => {
            let res = run_counterexample(family, &poles, theta, alpha, xi0)?;
            if let Some(p) = out.as_deref() {
                write_output(Some(p), &to_json(&res.window_file)?)?;
            }
            println!("{}", to_json(&res)?);
            Ok(res.verdict.exit_code())
        }
        Command::Identities { window, alpha, samples, seed } => {
            let g = WindowFile::load(&window)?.window()?;
            let (h, a) = rescale_to_unit_beta(&g, &Lattice::new(alpha, 1.0)?);
            let rep = run_identities(&h, a, samples, seed)?;
            println!("{}", to_json(&rep)?);
            Ok(if rep.max_generating < 1e-9 && rep.max_residue < 1e-9 { 0 } else { 2 })
        }
        Command::Sis { window, alpha, trials, taps, seed } => {
            let g = WindowFile::load(&window)?.window()?;
            let exp = sampling_experiment(&g, alpha, trials, taps, seed)?;
            println!("{}", to_json(&exp)?);
            Ok(if exp.a_emp > 0.0 { 0 } else { 2 })
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    init_threads();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}
