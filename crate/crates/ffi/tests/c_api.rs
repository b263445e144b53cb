use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lclt_ffi::*;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("lclt.h")
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lclt_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn form_lambda_matches_tau() {
    let mut form = ptr::null_mut();
    assert_eq!(unsafe { lclt_form_new(12, 100, &mut form) }, LcltStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { lclt_form_lambda(form, 2, &mut v) }, LcltStatus::Ok);
    assert!((v - (-24.0 / 2f64.powf(5.5))).abs() < 1e-15);
    assert_eq!(unsafe { lclt_form_weight(form) }, 12);
    assert_eq!(unsafe { lclt_form_max_n(form) }, 100);
    assert_eq!(unsafe { lclt_form_lambda(form, 101, &mut v) }, LcltStatus::Capacity);
    assert!(last_error().contains("101"));
    unsafe { lclt_form_free(form) };
}

#[test]
fn odd_weight_is_a_usage_error() {
    let mut form = ptr::null_mut();
    assert_eq!(unsafe { lclt_form_new(13, 100, &mut form) }, LcltStatus::Usage);
    assert!(form.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn corrupted_table_is_a_data_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 1\n2 -24\n3 252\n4 -1471\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut form = ptr::null_mut();
    assert_eq!(unsafe { lclt_form_load(c.as_ptr(), 12, &mut form) }, LcltStatus::DataIntegrity);
    assert!(form.is_null());
}

#[test]
fn null_arguments_are_rejected() {
    let mut v = 0.0;
    assert_eq!(unsafe { lclt_form_lambda(ptr::null(), 2, &mut v) }, LcltStatus::Usage);
    assert_eq!(unsafe { lclt_form_new(12, 10, ptr::null_mut()) }, LcltStatus::Usage);
    unsafe {
        lclt_form_free(ptr::null_mut());
        lclt_sample_free(ptr::null_mut());
        lclt_string_free(ptr::null_mut());
    }
}

#[test]
fn eval_methods_agree_at_t_100() {
    let cfg = lclt_eval_config_default();
    let n = lclt_required_length(12, 0.5, 100.0, LcltMethod::Contour, &cfg);
    let mut form = ptr::null_mut();
    assert_eq!(unsafe { lclt_form_new(12, n + 16, &mut form) }, LcltStatus::Ok);
    let mut a = LcltPoint { sigma: 0.0, t: 0.0, abs_l_sq: 0.0, log_abs_l: 0.0, est_error: 0.0, terms: 0, near_zero: false };
    let mut b = a;
    assert_eq!(unsafe { lclt_eval(form, &cfg, 0.5, 100.0, LcltMethod::Contour, &mut a) }, LcltStatus::Ok);
    assert_eq!(unsafe { lclt_eval(form, ptr::null(), 0.5, 100.0, LcltMethod::AbsSquaredAfe, &mut b) }, LcltStatus::Ok);
    assert!((a.abs_l_sq - b.abs_l_sq).abs() <= a.est_error + b.est_error);
    let (mut re, mut im, mut err) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { lclt_l_value(form, &cfg, 0.5, 100.0, &mut re, &mut im, &mut err) }, LcltStatus::Ok);
    assert!((re * re + im * im - b.abs_l_sq).abs() < 1e-9);
    unsafe { lclt_form_free(form) };
}

#[test]
fn sample_run_round_trip() {
    let cfg = lclt_eval_config_default();
    let mut n = 0;
    assert_eq!(unsafe { lclt_sample_table_length(12, 1e3, &cfg, &mut n) }, LcltStatus::Ok);
    assert!(n >= lclt_required_length(12, 0.5, 2e3, LcltMethod::LValueAfe, &cfg));
    let mut bad = 1;
    assert_eq!(unsafe { lclt_sample_table_length(12, 1.0, &cfg, &mut bad) }, LcltStatus::Usage);
    assert_eq!(bad, 0);
    let mut form = ptr::null_mut();
    assert_eq!(unsafe { lclt_form_new(12, n + n / 50, &mut form) }, LcltStatus::Ok);
    let forms = [form as *const LcltForm];
    let mut run = ptr::null_mut();
    let st = unsafe { lclt_sample_new(forms.as_ptr(), 1, 1e3, 8, 7, LcltMode::RandomUniform, true, &cfg, &mut run) };
    assert_eq!(st, LcltStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { lclt_sample_len(run) }, 8);
    let (mut t, mut l) = (0.0, 0.0);
    assert_eq!(unsafe { lclt_sample_record(run, 3, 0, &mut t, &mut l) }, LcltStatus::Ok);
    assert!((1e3..2e3).contains(&t) && l.is_finite());
    assert_eq!(unsafe { lclt_sample_record(run, 8, 0, &mut t, &mut l) }, LcltStatus::Capacity);
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { lclt_sample_csv(run, &mut csv) }, LcltStatus::Ok);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_owned();
    assert!(text.starts_with("t,log_abs_L_1,re_P_1,m_residual,lm_residual,near_zero\n"));
    assert_eq!(text.lines().count(), 9);
    let mut zero = ptr::null_mut();
    let st = unsafe { lclt_sample_new(forms.as_ptr(), 1, 1e3, 0, 7, LcltMode::RandomUniform, false, &cfg, &mut zero) };
    assert_eq!(st, LcltStatus::Usage);
    unsafe {
        lclt_string_free(csv);
        lclt_sample_free(run);
        lclt_form_free(form);
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(lclt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "lclt_form_new",
        "lclt_form_load",
        "lclt_form_free",
        "lclt_eval",
        "lclt_l_value",
        "lclt_sample_new",
        "lclt_sample_csv",
        "lclt_sample_table_length",
        "lclt_last_error",
        "typedef struct LcltForm LcltForm",
        "LCLT_STATUS_CAPACITY = 3",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "lclt.h"

int main(void) {
    LcltForm *f = NULL;
    if (lclt_form_new(12, 200, &f) != LCLT_STATUS_OK) return 1;
    double v = 0.0;
    if (lclt_form_lambda(f, 2, &v) != LCLT_STATUS_OK) return 2;
    LcltPoint p;
    LcltEvalConfig cfg = lclt_eval_config_default();
    if (lclt_eval(f, &cfg, 2.0, 0.0, LCLT_METHOD_SERIES, &p) != LCLT_STATUS_OK) return 3;
    if (lclt_form_new(13, 10, &f) != LCLT_STATUS_USAGE) return 4;
    printf("%.15f %s\n", v, lclt_last_error()[0] ? "err" : "none");
    lclt_form_free(f);
    return 0;
}
"#;

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let inc = header().parent().unwrap().to_path_buf();
    let out = Command::new("cc").arg("-std=c99").arg("-Wall").arg("-Werror").arg("-fsyntax-only").arg("-I").arg(&inc).arg(&src).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_against_the_static_library() {
    // Integration tests live in target/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().parent().unwrap().join("liblclt_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let inc = header().parent().unwrap().to_path_buf();
    let out = Command::new("cc")
        .arg("-I")
        .arg(&inc)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "-0.530330085889911 err");
}
