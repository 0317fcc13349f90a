//! C ABI for `lobc`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns a
//! [`LobcStatus`]; on failure, [`lobc_last_error`] describes the problem for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lobc::harness::{execute, CommandKind, ExperimentConfig, GateSpec, ReportFile};
use lobc::magic::{canonical_decompose, in_l, is_nonentangling, ANGLE_TOL};
use lobc::{c64, ComplexMatrix, Error};

/// Result codes. Nonzero values other than `NullPointer` and `Panic` mirror
/// the CLI exit codes' categories.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OracleDisagreement = 3,
    BranchOverflow = 4,
    Io = 5,
    Panic = 6,
}

/// A two-qubit gate.
pub struct LobcGate {
    matrix: ComplexMatrix,
}

/// The report of one harness run.
pub struct LobcReport {
    report: ReportFile,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<Vec<u8>>) {
    let mut bytes = message.into();
    bytes.retain(|&b| b != 0);
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(bytes).unwrap_or_default());
}

fn status_of(e: &Error) -> LobcStatus {
    match e {
        Error::OracleDisagreement(_) => LobcStatus::OracleDisagreement,
        Error::BranchOverflow(_) => LobcStatus::BranchOverflow,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => LobcStatus::Io,
        _ => LobcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), LobcStatus>) -> LobcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LobcStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            LobcStatus::Panic
        }
    }
}

fn fail(e: Error) -> LobcStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LobcStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(LobcStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        LobcStatus::InvalidArgument
    })
}

fn non_null<T>(p: *const T) -> Result<(), LobcStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        Err(LobcStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lobc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; empty if none failed.
#[no_mangle]
pub extern "C" fn lobc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a gate spec (`cnot`, `0.3,0.5,0.7`, `haar:17`, ...).
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lobc_gate_from_spec(spec: *const c_char, out: *mut *mut LobcGate) -> LobcStatus {
    guard(|| {
        non_null(out)?;
        let spec: GateSpec = read_str(spec)?.parse().map_err(fail)?;
        *out = Box::into_raw(Box::new(LobcGate { matrix: spec.matrix() }));
        Ok(())
    })
}

/// Builds a gate from a row-major 4x4 matrix given as separate real and
/// imaginary arrays of 16 entries each.
///
/// # Safety
/// `re` and `im` must each point to 16 doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobc_gate_from_matrix(re: *const f64, im: *const f64, out: *mut *mut LobcGate) -> LobcStatus {
    guard(|| {
        non_null(re)?;
        non_null(im)?;
        non_null(out)?;
        let (re, im) = (std::slice::from_raw_parts(re, 16), std::slice::from_raw_parts(im, 16));
        let data = re.iter().zip(im).map(|(&r, &i)| c64(r, i)).collect();
        let matrix = ComplexMatrix::new(4, 4, data).map_err(fail)?;
        matrix.ensure_unitary().map_err(fail)?;
        *out = Box::into_raw(Box::new(LobcGate { matrix }));
        Ok(())
    })
}

/// # Safety
/// `gate` must come from a `lobc_gate_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lobc_gate_free(gate: *mut LobcGate) {
    if !gate.is_null() {
        drop(Box::from_raw(gate));
    }
}

/// Canonical angles `(α, β, γ)` of the gate's decomposition.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobc_gate_canonical_angles(
    gate: *const LobcGate,
    alpha: *mut f64,
    beta: *mut f64,
    gamma: *mut f64,
) -> LobcStatus {
    guard(|| {
        non_null(gate)?;
        non_null(alpha)?;
        non_null(beta)?;
        non_null(gamma)?;
        let f = canonical_decompose(&(*gate).matrix).map_err(fail)?;
        (*alpha, *beta, *gamma) = (f.alpha, f.beta, f.gamma);
        Ok(())
    })
}

/// Whether the gate is in L (all canonical angles multiples of π/4) and
/// whether it is nonentangling.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobc_gate_classify(gate: *const LobcGate, in_l_out: *mut bool, nonentangling: *mut bool) -> LobcStatus {
    guard(|| {
        non_null(gate)?;
        non_null(in_l_out)?;
        non_null(nonentangling)?;
        *in_l_out = in_l(&(*gate).matrix, ANGLE_TOL).map_err(fail)?;
        *nonentangling = is_nonentangling(&(*gate).matrix, ANGLE_TOL).map_err(fail)?;
        Ok(())
    })
}

fn parse_config(command: &str, overrides: Option<&str>) -> Result<ExperimentConfig, Error> {
    let command: CommandKind = command.parse()?;
    let mut config = serde_json::to_value(ExperimentConfig::new(command))?;
    if let Some(text) = overrides {
        let patch: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(patch) = patch else {
            return Err(Error::InvalidParameter("configuration must be a JSON object".into()));
        };
        for (k, v) in patch {
            if config.get(&k).is_none() {
                return Err(Error::InvalidParameter(format!("unknown configuration key `{k}`")));
            }
            config[k] = v;
        }
    }
    Ok(serde_json::from_value(config)?)
}

/// Runs one harness command (`run`, `enumerate`, `classify`, ...). `config_json`
/// is a JSON object overriding configuration defaults, e.g.
/// `{"protocol":"u2","gate":"0.3,0.5,0.7","rounds":2,"trials":1000}`; it may
/// be NULL.
///
/// # Safety
/// `command` must be a NUL-terminated string, `config_json` NULL or
/// NUL-terminated, and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lobc_execute(command: *const c_char, config_json: *const c_char, out: *mut *mut LobcReport) -> LobcStatus {
    guard(|| {
        non_null(out)?;
        let command = read_str(command)?;
        let overrides = if config_json.is_null() { None } else { Some(read_str(config_json)?) };
        let config = parse_config(command, overrides).map_err(fail)?;
        let report = execute(&config).map_err(fail)?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| fail(e.into()))?;
        let json = CString::new(json).map_err(|_| {
            set_error("report contains a NUL byte");
            LobcStatus::Io
        })?;
        *out = Box::into_raw(Box::new(LobcReport { report, json }));
        Ok(())
    })
}

/// The report as JSON. The string is owned by the report.
///
/// # Safety
/// `report` must be a live handle from [`lobc_execute`].
#[no_mangle]
pub unsafe extern "C" fn lobc_report_json(report: *const LobcReport) -> *const c_char {
    if report.is_null() {
        return ptr::null();
    }
    (*report).json.as_ptr()
}

/// Measured and predicted success probability of a protocol run.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobc_report_success(report: *const LobcReport, measured: *mut f64, predicted: *mut f64) -> LobcStatus {
    guard(|| {
        non_null(report)?;
        non_null(measured)?;
        non_null(predicted)?;
        let r = &(*report).report;
        match (&r.measured, &r.predicted) {
            (Some(m), Some(p)) => {
                *measured = m.success_probability;
                *predicted = p.success_probability;
                Ok(())
            }
            _ => {
                set_error("report has no protocol run");
                Err(LobcStatus::InvalidArgument)
            }
        }
    })
}

/// Allocated ebits and broadcast classical bits of a protocol run.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobc_report_ledger(report: *const LobcReport, allocated_ebits: *mut f64, cbits: *mut u64) -> LobcStatus {
    guard(|| {
        non_null(report)?;
        non_null(allocated_ebits)?;
        non_null(cbits)?;
        let Some(ledger) = &(*report).report.ledger else {
            set_error("report has no protocol run");
            return Err(LobcStatus::InvalidArgument);
        };
        *allocated_ebits = ledger.allocated_ebits;
        *cbits = ledger.cbits_broadcast;
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`lobc_execute`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lobc_report_free(report: *mut LobcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
