use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use cat0_boundary_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    cb_string_free(p);
    s
}

unsafe fn last_error() -> String {
    CStr::from_ptr(cb_last_error_message()).to_str().unwrap().to_string()
}

unsafe fn preset(name: &str) -> *mut CbSpec {
    let mut h = ptr::null_mut();
    assert_eq!(cb_spec_preset(c(name).as_ptr(), &mut h), CbStatus::Ok);
    h
}

#[test]
fn orbit_limits_through_handles() {
    unsafe {
        let star = preset("star");
        let mut out = ptr::null_mut();
        assert_eq!(cb_orbit_limit(star, c("aaabbb:0").as_ptr(), &mut out), CbStatus::Ok);
        assert_eq!(take(out), "[(aaabbb)^inf, slope=1/1]");
        assert_eq!(cb_orbit_limit(star, c(":0").as_ptr(), &mut out), CbStatus::NoLimit);
        assert!(!last_error().is_empty());
        assert_eq!(cb_orbit_limit(star, c("axb").as_ptr(), &mut out), CbStatus::Parse);
        cb_spec_free(star);
    }
}

#[test]
fn custom_spec_and_errors() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cb_spec_new(c("0").as_ptr(), c("2").as_ptr(), c("1").as_ptr(), &mut h), CbStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(cb_orbit_limit(h, c("b:0").as_ptr(), &mut out), CbStatus::Ok);
        assert_eq!(take(out), "[(b)^inf, slope=2/1]");
        cb_spec_free(h);
        assert_eq!(cb_spec_new(c("0").as_ptr(), c("0").as_ptr(), c("0").as_ptr(), &mut h), CbStatus::UnsupportedSpec);
        assert_eq!(cb_spec_preset(c("nope").as_ptr(), &mut h), CbStatus::Config);
        assert_eq!(cb_spec_preset(ptr::null(), &mut h), CbStatus::NullPointer);
        assert_eq!(cb_orbit_limit(ptr::null(), c("a:0").as_ptr(), &mut out), CbStatus::NullPointer);
        cb_spec_free(ptr::null_mut());
        cb_string_free(ptr::null_mut());
    }
}

#[test]
fn condition_star_and_minimal_m() {
    unsafe {
        let (dot, star) = (preset("dot"), preset("star"));
        let mut holds = true;
        let mut json = ptr::null_mut();
        assert_eq!(cb_check_star(dot, star, c("1").as_ptr(), c("1").as_ptr(), 4, &mut holds, &mut json), CbStatus::Ok);
        assert!(!holds);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["holds_on_ball"], false);
        assert_eq!(cb_check_star(dot, dot, c("1").as_ptr(), c("1").as_ptr(), 4, &mut holds, ptr::null_mut()), CbStatus::Ok);
        assert!(holds);
        assert_eq!(
            cb_check_star(dot, star, c("1/2").as_ptr(), c("1").as_ptr(), 4, &mut holds, ptr::null_mut()),
            CbStatus::InvalidConstants
        );
        let mut out = ptr::null_mut();
        assert_eq!(cb_minimal_m_sq(dot, dot, c("1").as_ptr(), 4, &mut out), CbStatus::Ok);
        // identical actions: the worst pair meeting the X ball sits at distance exactly N
        assert_eq!(take(out), "1/1");
        cb_spec_free(dot);
        cb_spec_free(star);
    }
}

#[test]
fn phibar_and_tree_distance() {
    unsafe {
        let (dot, scaled) = (preset("dot"), preset("scaled2"));
        let mut out = ptr::null_mut();
        assert_eq!(cb_phibar(dot, scaled, c("3/4").as_ptr(), c("[(ab)^inf,1/2]").as_ptr(), 24, &mut out), CbStatus::Ok);
        assert_eq!(take(out), "[(ab)^inf, slope=1/1]");
        assert_eq!(cb_phibar(dot, scaled, c("1/4").as_ptr(), c("[a^inf,0]").as_ptr(), 24, &mut out), CbStatus::InvalidConstants);
        assert_eq!(cb_tree_dist(c("b").as_ptr(), c("aa").as_ptr(), &mut out), CbStatus::Ok);
        assert_eq!(take(out), "3/1");
        cb_spec_free(dot);
        cb_spec_free(scaled);
        assert!(!CStr::from_ptr(cb_version()).to_str().unwrap().is_empty());
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cat0_boundary.h")).unwrap();
    for name in [
        "cb_spec_preset", "cb_spec_new", "cb_spec_free", "cb_orbit_limit", "cb_check_star", "cb_minimal_m_sq",
        "cb_phibar", "cb_tree_dist", "cb_string_free", "cb_last_error_message", "cb_version", "CB_STATUS_OK",
        "typedef struct CbSpec CbSpec",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}

/// Compiles the C smoke program against the header and the static library, when both a C
/// compiler and the archive are at hand.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libcat0_boundary_ffi.a");
    if !lib.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library at {} or no cc", lib.display());
        return;
    }
    let dir = env!("CARGO_MANIFEST_DIR");
    let bin = std::env::temp_dir().join(format!("cat0_smoke_{}", std::process::id()));
    let status = std::process::Command::new("cc")
        .args([&format!("{dir}/tests/c/smoke.c"), "-I", &format!("{dir}/include"), "-o"])
        .arg(&bin)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    let _ = std::fs::remove_file(&bin);
    assert!(out.status.success(), "smoke program exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok "));
}
