use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use lobc_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lobc_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(lobc_version()) }.to_str().unwrap();
    assert_eq!(v, lobc::VERSION);
}

#[test]
fn gate_roundtrip_and_classification() {
    let mut gate = ptr::null_mut();
    unsafe {
        assert_eq!(lobc_gate_from_spec(cstr("cnot").as_ptr(), &mut gate), LobcStatus::Ok);
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        assert_eq!(lobc_gate_canonical_angles(gate, &mut a, &mut b, &mut c), LobcStatus::Ok);
        let mut sorted = [a.abs(), b.abs(), c.abs()];
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[2] - std::f64::consts::FRAC_PI_4).abs() < 1e-9 && sorted[1] < 1e-9);
        let (mut l, mut ne) = (false, true);
        assert_eq!(lobc_gate_classify(gate, &mut l, &mut ne), LobcStatus::Ok);
        assert!(l && !ne);
        lobc_gate_free(gate);
    }
}

#[test]
fn matrix_constructor_checks_unitarity() {
    let mut re = [0.0; 16];
    let im = [0.0; 16];
    for k in 0..4 {
        re[k * 5] = 1.0;
    }
    let mut gate = ptr::null_mut();
    unsafe {
        assert_eq!(lobc_gate_from_matrix(re.as_ptr(), im.as_ptr(), &mut gate), LobcStatus::Ok);
        lobc_gate_free(gate);
        re[0] = 2.0;
        assert_eq!(lobc_gate_from_matrix(re.as_ptr(), im.as_ptr(), &mut gate), LobcStatus::InvalidArgument);
    }
    assert!(!last_error().is_empty());
}

#[test]
fn bad_arguments_are_reported() {
    let mut gate = ptr::null_mut();
    unsafe {
        assert_eq!(lobc_gate_from_spec(cstr("toffoli").as_ptr(), &mut gate), LobcStatus::InvalidArgument);
        assert!(last_error().contains("toffoli"));
        assert_eq!(lobc_gate_from_spec(ptr::null(), &mut gate), LobcStatus::NullPointer);
        assert_eq!(lobc_gate_from_spec(cstr("cnot").as_ptr(), ptr::null_mut()), LobcStatus::NullPointer);
        lobc_gate_free(ptr::null_mut());
        lobc_report_free(ptr::null_mut());
        assert!(lobc_report_json(ptr::null()).is_null());
    }
}

#[test]
fn execute_protocol_run() {
    let mut report = ptr::null_mut();
    let config = cstr(r#"{"protocol":"u2e","gate":"swap","trials":50,"seed":3}"#);
    unsafe {
        assert_eq!(lobc_execute(cstr("run").as_ptr(), config.as_ptr(), &mut report), LobcStatus::Ok, "{}", last_error());
        let (mut m, mut p) = (0.0, 0.0);
        assert_eq!(lobc_report_success(report, &mut m, &mut p), LobcStatus::Ok);
        assert_eq!((m, p), (1.0, 1.0));
        let (mut ebits, mut cbits) = (0.0, 0);
        assert_eq!(lobc_report_ledger(report, &mut ebits, &mut cbits), LobcStatus::Ok);
        assert_eq!((ebits, cbits), (2.0, 4));
        let json: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(lobc_report_json(report)).to_str().unwrap()).unwrap();
        assert_eq!(json["protocol"]["name"], "u2e");
        lobc_report_free(report);
    }
}

#[test]
fn execute_reports_overflow_and_bad_config() {
    let mut report = ptr::null_mut();
    unsafe {
        let overflow = cstr(r#"{"protocol":"u2","gate":"0.3,0.5,0.7","max_branches":10}"#);
        assert_eq!(lobc_execute(cstr("enumerate").as_ptr(), overflow.as_ptr(), &mut report), LobcStatus::BranchOverflow);
        let unknown = cstr(r#"{"rounds_":2}"#);
        assert_eq!(lobc_execute(cstr("bounds").as_ptr(), unknown.as_ptr(), &mut report), LobcStatus::InvalidArgument);
        assert!(last_error().contains("rounds_"));
        assert_eq!(lobc_execute(cstr("bounds").as_ptr(), ptr::null(), &mut report), LobcStatus::Ok);
        let (mut m, mut p) = (0.0, 0.0);
        assert_eq!(lobc_report_success(report, &mut m, &mut p), LobcStatus::InvalidArgument);
        lobc_report_free(report);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lobc.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["lobc_execute", "lobc_gate_from_spec", "lobc_report_free", "LOBC_STATUS_BRANCH_OVERFLOW"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c11"]).arg(&header).status() else {
        return;
    };
    assert!(status.success());
}
