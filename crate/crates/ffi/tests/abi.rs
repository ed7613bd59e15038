use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rpz_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { rpz_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn profile(lit: &str) -> *mut RpzProfile {
    let c = CString::new(lit).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { rpz_profile_parse(c.as_ptr(), &mut p) },
        RpzStatus::Ok
    );
    p
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(rpz_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn profile_phase_and_errors() {
    unsafe {
        for (lit, phase) in [
            ("alpha=0", RpzPhase::Liquid),
            ("alpha=-0.5", RpzPhase::WeakCrystalline),
            ("alpha=-2", RpzPhase::StrongCrystalline),
        ] {
            let p = profile(lit);
            let mut out = RpzPhase::Liquid;
            assert_eq!(rpz_profile_phase(p, &mut out), RpzStatus::Ok);
            assert_eq!(out, phase, "{lit}");
            rpz_profile_free(p);
        }
        let bad = CString::new("alpha=oops").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(
            rpz_profile_parse(bad.as_ptr(), &mut p),
            RpzStatus::InvalidInput
        );
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            rpz_profile_parse(ptr::null(), &mut p),
            RpzStatus::NullPointer
        );
        assert!(last_error().contains("null"));
        rpz_profile_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    unsafe {
        let mut p = ptr::null_mut();
        rpz_profile_parse(ptr::null(), &mut p);
        let full = rpz_last_error(ptr::null_mut(), 0);
        let mut small = [0 as c_char; 4];
        assert_eq!(rpz_last_error(small.as_mut_ptr(), 4), full);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 3);
    }
}

#[test]
fn window_round_trip() {
    unsafe {
        let p = profile("alpha=-2,slow=const:1,sigma=1");
        let mut w = ptr::null_mut();
        assert_eq!(rpz_window_new(p, 1000, 0.3, &mut w), RpzStatus::Ok);
        let (mut r, mut c) = (0.0, 0.0);
        assert_eq!(
            rpz_window_params(w, &mut r, &mut c, ptr::null_mut()),
            RpzStatus::Ok
        );
        assert!(r > 1.0 && r < 1.02);
        assert_eq!(c, 1.0);
        let (mut zr, mut zi, mut ur, mut ui) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            rpz_window_to_z(w, 0.7, -1.3, &mut zr, &mut zi),
            RpzStatus::Ok
        );
        assert_eq!(rpz_window_to_u(w, zr, zi, &mut ur, &mut ui), RpzStatus::Ok);
        assert!((ur - 0.7).abs() < 1e-9 && (ui + 1.3).abs() < 1e-9);
        assert_eq!(
            rpz_window_to_z(w, 0.0, 0.0, ptr::null_mut(), &mut zi),
            RpzStatus::NullPointer
        );
        rpz_window_free(w);

        let mut w2 = ptr::null_mut();
        assert_eq!(rpz_window_new(p, 0, 0.0, &mut w2), RpzStatus::InvalidInput);
        rpz_profile_free(p);
    }
}

#[test]
fn zeros_through_handles() {
    unsafe {
        let p = profile("alpha=0");
        let law = CString::new("icn:1").unwrap();
        let mut z = ptr::null_mut();
        assert_eq!(
            rpz_sample_zeros(p, law.as_ptr(), 40, 7, 0, &mut z),
            RpzStatus::Ok
        );
        assert_eq!(rpz_zero_set_len(z), 40);
        let mut ok = false;
        assert_eq!(rpz_zero_set_converged(z, &mut ok), RpzStatus::Ok);
        assert!(ok);
        let (mut re, mut im) = (vec![0.0; 40], vec![0.0; 40]);
        let mut n = 0;
        assert_eq!(
            rpz_zero_set_copy(z, re.as_mut_ptr(), im.as_mut_ptr(), 40, &mut n),
            RpzStatus::Ok
        );
        assert_eq!(n, 40);
        assert!(re
            .iter()
            .zip(&im)
            .all(|(a, b)| a.hypot(*b) > 0.3 && a.hypot(*b) < 3.0));
        assert_eq!(
            rpz_zero_set_copy(z, re.as_mut_ptr(), im.as_mut_ptr(), 10, &mut n),
            RpzStatus::BufferTooSmall
        );
        assert_eq!(n, 10);

        // Same seed, same zeros.
        let mut z2 = ptr::null_mut();
        rpz_sample_zeros(p, law.as_ptr(), 40, 7, 0, &mut z2);
        let (mut re2, mut im2) = (vec![0.0; 40], vec![0.0; 40]);
        rpz_zero_set_copy(z2, re2.as_mut_ptr(), im2.as_mut_ptr(), 40, &mut n);
        assert_eq!((re, im), (re2, im2));

        let bad = CString::new("cauchy").unwrap();
        let mut z3 = ptr::null_mut();
        assert_eq!(
            rpz_sample_zeros(p, bad.as_ptr(), 40, 7, 0, &mut z3),
            RpzStatus::InvalidInput
        );
        assert_eq!(rpz_zero_set_len(ptr::null()), 0);
        rpz_zero_set_free(z);
        rpz_zero_set_free(z2);
        rpz_profile_free(p);
    }
}

#[test]
fn theory_values() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(rpz_rho1(0.0, 1.0, &mut v), RpzStatus::Ok);
        assert!((v - rpz::theory::kac_closed_form(1.0)).abs() < 1e-12);
        assert_eq!(rpz_rho1(-1.0, 1.0, &mut v), RpzStatus::Domain);
        let p = profile("alpha=0");
        assert_eq!(rpz_si_fraction(p, 10_000, &mut v), RpzStatus::Ok);
        assert!((v * 3f64.sqrt() - 1.0).abs() < 0.05);
        rpz_profile_free(p);
    }
}

#[test]
fn experiment_summary() {
    unsafe {
        let cfg = CString::new(r#"{"kind":"HaarTraceMoments","profile":"alpha=0","law":"icn:1","n":16,"k_max":2,"trials":200,"master_seed":1}"#)
            .unwrap();
        let mut e = ptr::null_mut();
        assert_eq!(
            rpz_experiment_run(cfg.as_ptr(), 2, &mut e),
            RpzStatus::Ok,
            "{}",
            last_error()
        );
        let json = CStr::from_ptr(rpz_experiment_summary(e)).to_str().unwrap();
        assert!(json.contains("HaarTraceMoments"));
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        let name = CString::new(v["statistics"][0]["name"].as_str().unwrap()).unwrap();
        let (mut m, mut se, mut z) = (0.0, 0.0, 0.0);
        assert_eq!(
            rpz_experiment_statistic(e, name.as_ptr(), &mut m, &mut se, &mut z),
            RpzStatus::Ok
        );
        assert!(z.abs() < 4.0, "{m} {se} {z}");
        let missing = CString::new("nope").unwrap();
        assert_eq!(
            rpz_experiment_statistic(e, missing.as_ptr(), &mut m, &mut se, &mut z),
            RpzStatus::InvalidInput
        );
        rpz_experiment_free(e);

        let bad = CString::new("{").unwrap();
        assert_eq!(rpz_experiment_run(bad.as_ptr(), 1, &mut e), RpzStatus::Json);
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_staticlib() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/rpz.h");
    assert!(header.exists());
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("librpz_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: no C compiler or static library at {}",
            lib.display()
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "rpz.h"
int main(void) {
    RpzProfile *p = NULL;
    if (rpz_profile_parse("alpha=-2", &p) != RPZ_STATUS_OK) return 1;
    RpzPhase ph;
    if (rpz_profile_phase(p, &ph) != RPZ_STATUS_OK || ph != RPZ_PHASE_STRONG_CRYSTALLINE) return 2;
    RpzZeroSet *z = NULL;
    if (rpz_sample_zeros(p, "icn:1", 30, 1, 0, &z) != RPZ_STATUS_OK) return 3;
    if (rpz_zero_set_len(z) != 30) return 4;
    if (rpz_profile_parse("bogus", &p) != RPZ_STATUS_INVALID_INPUT) return 5;
    char msg[128];
    rpz_last_error(msg, sizeof msg);
    printf("%s|%s\n", rpz_version(), msg);
    rpz_zero_set_free(z);
    rpz_profile_free(p);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
}
