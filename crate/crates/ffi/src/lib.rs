//! C ABI over `gabor-rational`.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! fallible call returns a [`GrStatus`]; the message of the most recent failure
//! on the calling thread is available from [`gr_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gabor_rational::cli::{run_certify, RunConfig, RunReport, WindowFile};
use gabor_rational::constructions::obstruction_roots;
use gabor_rational::{Error, Lattice, Method, RationalWindow, Verdict, C64};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidWindow = 2,
    InvalidLattice = 3,
    /// A certifier hypothesis or numerical guard failed.
    Failed = 4,
    /// The requested value is not present in the report.
    NotAvailable = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Verdict of a report; values equal the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrVerdict {
    FrameCertified = 0,
    NotFrameWitnessed = 1,
    Inconclusive = 2,
}

/// Certification method for [`gr_certify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrMethod {
    Auto = 0,
    Herglotz = 1,
    Irrational = 2,
    HighDensity = 3,
    NearCritical = 4,
    Critical = 5,
    Oracle = 6,
}

/// Opaque validated window.
pub struct GrWindow(RationalWindow);

/// Opaque certification report.
pub struct GrReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> GrStatus {
    match e {
        Error::InvalidLattice { .. } => GrStatus::InvalidLattice,
        e if e.is_input() => GrStatus::InvalidWindow,
        _ => GrStatus::Failed,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GrStatus, String)>) -> GrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GrStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            GrStatus::Panic
        }
    }
}

fn fail(e: Error) -> (GrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (GrStatus, String) {
    (GrStatus::NullPointer, "null pointer argument".to_string())
}

/// Message of the last failure on this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn gr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a window `g(t) = Σ aₖ/(t − i wₖ)` from `n` coefficient and pole pairs.
///
/// # Safety
/// The four arrays must hold `n` values each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_window_new(
    a_re: *const f64,
    a_im: *const f64,
    w_re: *const f64,
    w_im: *const f64,
    n: usize,
    out: *mut *mut GrWindow,
) -> GrStatus {
    guard(|| {
        if a_re.is_null() || a_im.is_null() || w_re.is_null() || w_im.is_null() || out.is_null() {
            return Err(null());
        }
        let get = |p: *const f64| std::slice::from_raw_parts(p, n);
        let a: Vec<C64> = get(a_re).iter().zip(get(a_im)).map(|(r, i)| C64::new(*r, *i)).collect();
        let w: Vec<C64> = get(w_re).iter().zip(get(w_im)).map(|(r, i)| C64::new(*r, *i)).collect();
        let g = RationalWindow::new(&a, &w).map_err(fail)?;
        *out = Box::into_raw(Box::new(GrWindow(g)));
        Ok(())
    })
}

/// # Safety
/// `w` must come from [`gr_window_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gr_window_free(w: *mut GrWindow) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Number of terms, or 0 for a null handle.
///
/// # Safety
/// `w` must be null or a live window handle.
#[no_mangle]
pub unsafe extern "C" fn gr_window_len(w: *const GrWindow) -> usize {
    w.as_ref().map(|w| w.0.len()).unwrap_or(0)
}

/// Evaluate `g(t)`.
///
/// # Safety
/// `w` must be a live window handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_window_eval(w: *const GrWindow, t: f64, re: *mut f64, im: *mut f64) -> GrStatus {
    guard(|| {
        let (Some(w), false, false) = (w.as_ref(), re.is_null(), im.is_null()) else { return Err(null()) };
        let v = w.0.eval(t);
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

fn method(m: GrMethod) -> Method {
    match m {
        GrMethod::Auto => Method::Auto,
        GrMethod::Herglotz => Method::Herglotz,
        GrMethod::Irrational => Method::Irrational,
        GrMethod::HighDensity => Method::HighDensity,
        GrMethod::NearCritical => Method::NearCritical,
        GrMethod::Critical => Method::Critical,
        GrMethod::Oracle => Method::Oracle,
    }
}

/// Certify `w` on the lattice `αℤ × βℤ`. A nonzero `cross_check` also runs the
/// finite-section estimate and records it in the diagnostics.
///
/// # Safety
/// `w` must be a live window handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_certify(
    w: *const GrWindow,
    alpha: f64,
    beta: f64,
    m: GrMethod,
    cross_check: i32,
    out: *mut *mut GrReport,
) -> GrStatus {
    guard(|| {
        let (Some(w), false) = (w.as_ref(), out.is_null()) else { return Err(null()) };
        let lattice = Lattice::new(alpha, beta).map_err(fail)?;
        let cfg = RunConfig {
            window: WindowFile::from_window(&w.0),
            lattice,
            method: method(m),
            tol: 1e-9,
            cross_check: cross_check != 0,
        };
        let rep = run_certify(&cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(GrReport(rep)));
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`gr_certify`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gr_report_free(r: *mut GrReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Verdict of a report; `Inconclusive` for a null handle.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn gr_report_verdict(r: *const GrReport) -> GrVerdict {
    match r.as_ref().map(|r| r.0.report.verdict) {
        Some(Verdict::FrameCertified) => GrVerdict::FrameCertified,
        Some(Verdict::NotFrameWitnessed) => GrVerdict::NotFrameWitnessed,
        _ => GrVerdict::Inconclusive,
    }
}

unsafe fn report_value(r: *const GrReport, out: *mut f64, pick: fn(&RunReport) -> Option<f64>) -> GrStatus {
    guard(|| {
        let (Some(r), false) = (r.as_ref(), out.is_null()) else { return Err(null()) };
        let v = pick(&r.0).ok_or((GrStatus::NotAvailable, "value not present in report".to_string()))?;
        *out = v;
        Ok(())
    })
}

/// Lower criterion bound `A_crit`.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_report_a_crit(r: *const GrReport, out: *mut f64) -> GrStatus {
    report_value(r, out, |r| r.report.a_crit)
}

/// Upper criterion bound `B_crit`.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_report_b_crit(r: *const GrReport, out: *mut f64) -> GrStatus {
    report_value(r, out, |r| r.report.b_crit)
}

/// Report as JSON; release with [`gr_string_free`]. Null on failure.
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn gr_report_to_json(r: *const GrReport) -> *mut c_char {
    let mut s = ptr::null_mut();
    let st = guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        let text = serde_json::to_string(&r.0).map_err(|e| (GrStatus::Failed, e.to_string()))?;
        s = CString::new(text).map_err(|e| (GrStatus::Failed, e.to_string()))?.into_raw();
        Ok(())
    });
    if st == GrStatus::Ok {
        s
    } else {
        ptr::null_mut()
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Roots of the degree-3 obstruction equation at `alpha`, sorted by real then
/// imaginary part. Writes up to `cap` roots and the total count to `len`.
///
/// # Safety
/// `re` and `im` must hold `cap` values; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_obstruction_roots(alpha: f64, re: *mut f64, im: *mut f64, cap: usize, len: *mut usize) -> GrStatus {
    guard(|| {
        if re.is_null() || im.is_null() || len.is_null() {
            return Err(null());
        }
        let roots = obstruction_roots(alpha).map_err(fail)?;
        *len = roots.len();
        if roots.len() > cap {
            return Err((GrStatus::BufferTooSmall, format!("need room for {} roots", roots.len())));
        }
        for (k, z) in roots.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Parse a window file (JSON `{"a": [[re, im], ...], "w": [...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_window_from_json(json: *const c_char, out: *mut *mut GrWindow) -> GrStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (GrStatus::InvalidWindow, e.to_string()))?;
        let file: WindowFile = serde_json::from_str(text).map_err(|e| (GrStatus::InvalidWindow, e.to_string()))?;
        let g = file.window().map_err(fail)?;
        *out = Box::into_raw(Box::new(GrWindow(g)));
        Ok(())
    })
}
