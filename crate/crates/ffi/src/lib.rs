//! C ABI over workspaces and command reports.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Strings returned by a handle stay
//! valid until that handle is freed. On any status other than
//! `AF2_STATUS_OK`, `AF2_STATUS_FAIL` or `AF2_STATUS_UNKNOWN`,
//! `af2_last_error` describes the problem.

use af2lab::cli::{resolve_formula, run_args, CliError};
use af2lab::corpus::Corpus;
use af2lab::positivity::classify;
use af2lab::report::{Report, EXIT_FAIL, EXIT_OK, EXIT_UNKNOWN};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Af2Status {
    Ok = 0,
    Fail = 1,
    Usage = 2,
    Unknown = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Parse = 6,
    Panic = 7,
}

/// A set of parsed workspace files.
pub struct Af2Workspace {
    corpus: Corpus,
}

/// The result of one command.
pub struct Af2Report {
    report: Report,
    text: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Af2Status) -> Af2Status {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            Af2Status::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Af2Status> {
    if p.is_null() {
        set_error("null argument");
        return Err(Af2Status::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not UTF-8");
        Af2Status::InvalidUtf8
    })
}

fn status_of(report: &Report) -> Af2Status {
    match report.exit_code() {
        EXIT_OK => Af2Status::Ok,
        EXIT_FAIL => Af2Status::Fail,
        EXIT_UNKNOWN => Af2Status::Unknown,
        _ => Af2Status::Usage,
    }
}

/// Message of the last error on this thread; empty when none.
#[no_mangle]
pub extern "C" fn af2_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The workspace files shipped with the library.
#[no_mangle]
pub extern "C" fn af2_workspace_bundled() -> *mut Af2Workspace {
    Box::into_raw(Box::new(Af2Workspace { corpus: Corpus::bundled() }))
}

/// Parses one workspace file from `text`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af2_workspace_parse(text: *const c_char, out: *mut *mut Af2Workspace) -> Af2Status {
    guard(|| {
        if out.is_null() {
            set_error("null argument");
            return Af2Status::NullArgument;
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Corpus::from_sources(&[("workspace", text)]) {
            Ok(corpus) => {
                *out = Box::into_raw(Box::new(Af2Workspace { corpus }));
                Af2Status::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                Af2Status::Parse
            }
        }
    })
}

/// # Safety
/// `ws` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn af2_workspace_free(ws: *mut Af2Workspace) {
    if !ws.is_null() {
        drop(Box::from_raw(ws));
    }
}

/// Runs a command line such as `{"check"}` or
/// `{"complete", "--type", "Bool", "--size", "7"}` against `ws`. The
/// report is stored in `out` whenever the command ran; the status mirrors
/// the command-line exit code.
///
/// # Safety
/// `ws` must be a live handle, `argv` must point to `argc` NUL-terminated
/// strings and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af2_run(
    ws: *const Af2Workspace,
    argv: *const *const c_char,
    argc: usize,
    out: *mut *mut Af2Report,
) -> Af2Status {
    guard(|| {
        if ws.is_null() || out.is_null() || (argv.is_null() && argc > 0) {
            set_error("null argument");
            return Af2Status::NullArgument;
        }
        *out = ptr::null_mut();
        let mut args = Vec::with_capacity(argc);
        for i in 0..argc {
            match read_str(*argv.add(i)) {
                Ok(a) => args.push(a.to_string()),
                Err(s) => return s,
            }
        }
        match run_args(&(*ws).corpus, args) {
            Ok(report) => {
                let status = status_of(&report);
                let text = CString::new(report.to_string().replace('\0', " ")).unwrap_or_default();
                *out = Box::into_raw(Box::new(Af2Report { report, text }));
                status
            }
            Err(e) => {
                set_error(e.to_string());
                match e {
                    CliError::Parse(_) | CliError::Corpus(_) => Af2Status::Parse,
                    CliError::Usage(_) => Af2Status::Usage,
                }
            }
        }
    })
}

/// The printed report, one line per item.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn af2_report_text(r: *const Af2Report) -> *const c_char {
    if r.is_null() {
        return ptr::null();
    }
    (*r).text.as_ptr()
}

/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn af2_report_status(r: *const Af2Report) -> Af2Status {
    if r.is_null() {
        return Af2Status::NullArgument;
    }
    status_of(&(*r).report)
}

/// Number of PASS/FAIL/UNKNOWN items.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn af2_report_item_count(r: *const Af2Report) -> usize {
    if r.is_null() {
        return 0;
    }
    (*r).report.items.len()
}

/// # Safety
/// `r` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn af2_report_free(r: *mut Af2Report) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// ∀₂⁺ and ∀₂⁻ membership of a formula over the signature of `ws`.
///
/// # Safety
/// `ws` must be a live handle, `formula` a NUL-terminated string and
/// `positive`, `negative` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn af2_classify(
    ws: *const Af2Workspace,
    formula: *const c_char,
    positive: *mut bool,
    negative: *mut bool,
) -> Af2Status {
    guard(|| {
        if ws.is_null() || positive.is_null() || negative.is_null() {
            set_error("null argument");
            return Af2Status::NullArgument;
        }
        let text = match read_str(formula) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match resolve_formula(&(*ws).corpus, text) {
            Ok((_, a)) => {
                let p = classify(&a);
                *positive = p.positive;
                *negative = p.negative;
                Af2Status::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                Af2Status::Parse
            }
        }
    })
}
