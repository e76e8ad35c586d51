use std::ffi::{CStr, CString};
use std::ptr;

use gabor_rational_ffi::*;

unsafe fn herglotz() -> *mut GrWindow {
    let (a_re, a_im, w_re, w_im) = ([1.0, 1.0], [0.0, 0.0], [1.0, 2.0], [0.0, 0.0]);
    let mut w = ptr::null_mut();
    let st = gr_window_new(a_re.as_ptr(), a_im.as_ptr(), w_re.as_ptr(), w_im.as_ptr(), 2, &mut w);
    assert_eq!(st, GrStatus::Ok);
    w
}

#[test]
fn window_roundtrip_and_eval() {
    unsafe {
        let w = herglotz();
        assert_eq!(gr_window_len(w), 2);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(gr_window_eval(w, 0.0, &mut re, &mut im), GrStatus::Ok);
        // 1/(−i) + 1/(−2i) = 1.5i
        assert!(re.abs() < 1e-15 && (im - 1.5).abs() < 1e-15);
        gr_window_free(w);
        assert_eq!(gr_window_len(ptr::null()), 0);
    }
}

#[test]
fn invalid_window_sets_error() {
    unsafe {
        let (a, z, w) = ([1.0], [0.0], [0.0]);
        let mut out = ptr::null_mut();
        let st = gr_window_new(a.as_ptr(), z.as_ptr(), w.as_ptr(), [1.0].as_ptr(), 1, &mut out);
        assert_eq!(st, GrStatus::InvalidWindow);
        assert!(out.is_null());
        let msg = CStr::from_ptr(gr_last_error()).to_str().unwrap();
        assert!(msg.contains("real axis"), "{msg}");
        assert_eq!(gr_window_new(ptr::null(), z.as_ptr(), w.as_ptr(), w.as_ptr(), 1, &mut out), GrStatus::NullPointer);
    }
}

#[test]
fn certify_and_report() {
    unsafe {
        let w = herglotz();
        let mut r = ptr::null_mut();
        assert_eq!(gr_certify(w, 0.7, 1.0, GrMethod::Auto, 0, &mut r), GrStatus::Ok);
        assert_eq!(gr_report_verdict(r), GrVerdict::FrameCertified);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(gr_report_a_crit(r, &mut a), GrStatus::Ok);
        assert_eq!(gr_report_b_crit(r, &mut b), GrStatus::Ok);
        assert!(a > 0.0 && a <= b);
        let js = gr_report_to_json(r);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(js).to_str().unwrap()).unwrap();
        assert_eq!(v["method"], "herglotz");
        gr_string_free(js);
        gr_report_free(r);

        let mut r = ptr::null_mut();
        assert_eq!(gr_certify(w, 2.0, 1.0, GrMethod::Auto, 0, &mut r), GrStatus::Ok);
        assert_eq!(gr_report_verdict(r), GrVerdict::NotFrameWitnessed);
        assert_eq!(gr_report_a_crit(r, &mut a), GrStatus::NotAvailable);
        gr_report_free(r);

        assert_eq!(gr_certify(w, -1.0, 1.0, GrMethod::Auto, 0, &mut r), GrStatus::InvalidLattice);
        gr_window_free(w);
    }
}

#[test]
fn window_from_json() {
    unsafe {
        let text = CString::new(r#"{"a":[[1,0],[-1,0]],"w":[[1,0],[2,0]]}"#).unwrap();
        let mut w = ptr::null_mut();
        assert_eq!(gr_window_from_json(text.as_ptr(), &mut w), GrStatus::Ok);
        assert_eq!(gr_window_len(w), 2);
        gr_window_free(w);
        let bad = CString::new("{").unwrap();
        assert_eq!(gr_window_from_json(bad.as_ptr(), &mut w), GrStatus::InvalidWindow);
    }
}

#[test]
fn obstruction_roots_buffer() {
    unsafe {
        let mut re = [0.0; 12];
        let mut im = [0.0; 12];
        let mut n = 0;
        assert_eq!(gr_obstruction_roots(6.0 / 7.0, re.as_mut_ptr(), im.as_mut_ptr(), 2, &mut n), GrStatus::BufferTooSmall);
        assert_eq!(n, 12);
        assert_eq!(gr_obstruction_roots(6.0 / 7.0, re.as_mut_ptr(), im.as_mut_ptr(), 12, &mut n), GrStatus::Ok);
        assert!(re.iter().zip(&im).any(|(r, i)| (r + 1.12).abs() < 0.01 && i.abs() < 1e-10));
        assert_eq!(gr_obstruction_roots(0.5, re.as_mut_ptr(), im.as_mut_ptr(), 12, &mut n), GrStatus::Failed);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(gr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compile and run a C program against the generated header and static library.
#[test]
fn c_program_links() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = dir.join("../../target/debug");
    let lib = target.join("libgabor_rational_ffi.a");
    if !lib.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "gabor_rational.h"
int main(void) {
    double are[2] = {1, 1}, aim[2] = {0, 0}, wre[2] = {1, 2}, wim[2] = {0, 0};
    GrWindow *w = NULL;
    if (gr_window_new(are, aim, wre, wim, 2, &w) != GR_STATUS_OK) return 10;
    GrReport *r = NULL;
    if (gr_certify(w, 0.7, 1.0, GR_METHOD_HERGLOTZ, 0, &r) != GR_STATUS_OK) return 11;
    int v = gr_report_verdict(r);
    gr_report_free(r);
    gr_window_free(w);
    printf("%d\n", v);
    return v;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("main");
    let st = std::process::Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(std::process::Command::new(&exe).output().unwrap().status.code(), Some(0));
}
