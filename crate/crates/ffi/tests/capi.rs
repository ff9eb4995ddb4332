use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use mecmob_ffi::*;

fn last_error() -> String {
    let p = mec_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(toml: &str) -> *mut MecScenario {
    let text = CString::new(toml).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mec_scenario_from_toml(text.as_ptr(), &mut s) }, MecStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn short_run_through_the_abi() {
    let s = scenario("[schedule]\nhorizon = 40\n");
    unsafe {
        assert_eq!(mec_scenario_set_seed(s, 9), MecStatus::Ok);
        let mut a = MecRunReport::default();
        let mut b = MecRunReport::default();
        assert_eq!(mec_run(s, MecScheme::Proposed, &mut a), MecStatus::Ok);
        assert_eq!(mec_run(s, MecScheme::Proposed, &mut b), MecStatus::Ok);
        assert_eq!(a, b);
        assert_eq!(a.seed, 9);
        assert_eq!(a.frames, 40);
        assert!(a.energy_avg > 0.0);
        assert_eq!(a.drift_violations, 0);
        let mut r = MecRunReport::default();
        assert_eq!(mec_run(s, MecScheme::RssHysteresis, &mut r), MecStatus::Ok);
        assert_eq!(r.frames, 40);
        mec_scenario_free(s);
    }
}

#[test]
fn config_errors_carry_codes_and_messages() {
    let bad = CString::new("num_bs = 0\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mec_scenario_from_toml(bad.as_ptr(), &mut s) }, MecStatus::InvalidConfig);
    assert!(s.is_null());
    assert!(last_error().contains("num_bs"));

    let junk = CString::new("num_bs = [").unwrap();
    assert_eq!(unsafe { mec_scenario_from_toml(junk.as_ptr(), &mut s) }, MecStatus::Parse);

    let unknown = CString::new("warp_drive = 1\n").unwrap();
    assert_eq!(unsafe { mec_scenario_from_toml(unknown.as_ptr(), &mut s) }, MecStatus::Parse);
    assert!(last_error().contains("warp_drive"));
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(mec_scenario_default(ptr::null_mut()), MecStatus::NullPointer);
        assert_eq!(mec_scenario_from_toml(ptr::null(), &mut ptr::null_mut()), MecStatus::NullPointer);
        let mut r = MecRunReport::default();
        assert_eq!(mec_run(ptr::null(), MecScheme::Proposed, &mut r), MecStatus::NullPointer);
        assert_eq!(mec_exp_integral_e1(1.0, ptr::null_mut()), MecStatus::NullPointer);
        assert!(last_error().contains("out"));
        mec_scenario_free(ptr::null_mut());
        mec_controller_free(ptr::null_mut());
    }
}

#[test]
fn exponential_integral() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(mec_exp_integral_e1(1.0, &mut x), MecStatus::Ok);
        assert!((x - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert_eq!(mec_exp_integral_e1(0.0, &mut x), MecStatus::Domain);
        assert_eq!(mec_exp_integral_e1(f64::NAN, &mut x), MecStatus::Domain);
    }
}

#[test]
fn controller_queue_power_and_association() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(mec_scenario_default(&mut s), MecStatus::Ok);
        let mut c = ptr::null_mut();
        assert_eq!(mec_controller_new(s, &mut c), MecStatus::Ok);

        // empty queue: dropping is free, so nothing is offloaded
        let mut o = MecSlotOutcome::default();
        assert_eq!(mec_controller_optimal_power(c, 1e-11, 2e10, true, false, &mut o), MecStatus::Ok);
        assert!(o.failed && o.power == 0.0);

        let mut q = 0.0;
        for _ in 0..100 {
            assert_eq!(mec_controller_queue_update(c, 1.0, &mut q), MecStatus::Ok);
        }
        assert!((q - 100.0 * (1.0 - 1e-3)).abs() < 1e-9);
        let mut q2 = 0.0;
        assert_eq!(mec_controller_queue_len(c, &mut q2), MecStatus::Ok);
        assert_eq!(q, q2);
        assert_eq!(mec_controller_queue_update(c, 0.5, ptr::null_mut()), MecStatus::InvalidArgument);

        assert_eq!(mec_controller_optimal_power(c, 1e-11, 2e10, true, false, &mut o), MecStatus::Ok);
        assert!(!o.failed && o.power > 0.0 && o.energy > 0.0);
        assert_eq!(mec_controller_optimal_power(c, 1e-11, 2e10, true, true, &mut o), MecStatus::Ok);
        assert!(o.failed && o.energy == 0.0);
        assert_eq!(mec_controller_optimal_power(c, -1.0, 2e10, true, false, &mut o), MecStatus::InvalidArgument);

        let n = 25;
        let mut gains = vec![1e-15; n];
        gains[7] = 1e-9;
        let rates = vec![1.5e10; n];
        let (mut bs, mut moved) = (usize::MAX, false);
        let st = mec_controller_decide(c, gains.as_ptr(), rates.as_ptr(), n, 3, &mut bs, &mut moved);
        assert_eq!(st, MecStatus::Ok);
        assert_eq!((bs, moved), (7, true));
        let st = mec_controller_decide(c, gains.as_ptr(), rates.as_ptr(), 3, 0, &mut bs, &mut moved);
        assert_eq!(st, MecStatus::InvalidArgument);
        let st = mec_controller_decide(c, gains.as_ptr(), rates.as_ptr(), n, 99, &mut bs, &mut moved);
        assert_ne!(st, MecStatus::Ok);

        mec_controller_free(c);
        mec_scenario_free(s);
    }
}

#[test]
fn last_error_is_per_thread() {
    let mut x = 0.0;
    assert_eq!(unsafe { mec_exp_integral_e1(-2.0, &mut x) }, MecStatus::Domain);
    let other = std::thread::spawn(|| mec_last_error().is_null()).join().unwrap();
    assert!(other);
    assert!(!mec_last_error().is_null());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mec_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mecmob.h")
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "mecmob.h"

int main(void) {
    double e1 = 0.0;
    if (mec_exp_integral_e1(1.0, &e1) != MEC_STATUS_OK) return 1;
    if (mec_exp_integral_e1(-1.0, &e1) != MEC_STATUS_DOMAIN) return 2;
    if (mec_last_error() == NULL) return 3;
    MecScenario *s = NULL;
    if (mec_scenario_from_toml("[schedule]\nhorizon = 5\n", &s) != MEC_STATUS_OK) return 4;
    MecRunReport r;
    if (mec_run(s, MEC_SCHEME_PROPOSED, &r) != MEC_STATUS_OK) return 5;
    mec_scenario_free(s);
    printf("%.6f %llu\n", e1, (unsigned long long)r.frames);
    return 0;
}
"#;

#[test]
fn header_compiles_as_c() {
    let h = header();
    assert!(h.exists(), "build script should have written {}", h.display());
    if !have_cc() {
        eprintln!("skipping: no C compiler on PATH");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let st = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(h.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(st.success());
}

/// Builds the static library with cargo, then links and runs the C probe.
#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("skipping: no C compiler on PATH");
        return;
    }
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target"));
    let st = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "--lib", "-p", "mecmob-ffi", "--target-dir"])
        .arg(&target)
        .status()
        .unwrap();
    assert!(st.success());
    let lib = target.join("debug/libmecmob_ffi.a");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    let exe = dir.path().join("probe");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let st = Command::new("cc")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "probe exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.219384 5");
}
