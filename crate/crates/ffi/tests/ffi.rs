use af2lab_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn run(ws: *const Af2Workspace, args: &[&str]) -> (Af2Status, String, usize) {
    let owned: Vec<CString> = args.iter().map(|a| CString::new(*a).unwrap()).collect();
    let argv: Vec<*const std::ffi::c_char> = owned.iter().map(|a| a.as_ptr()).collect();
    let mut r = ptr::null_mut();
    unsafe {
        let status = af2_run(ws, argv.as_ptr(), argv.len(), &mut r);
        if r.is_null() {
            return (status, CStr::from_ptr(af2_last_error()).to_string_lossy().into_owned(), 0);
        }
        assert_eq!(af2_report_status(r), status);
        let text = CStr::from_ptr(af2_report_text(r)).to_string_lossy().into_owned();
        let n = af2_report_item_count(r);
        af2_report_free(r);
        (status, text, n)
    }
}

#[test]
fn bundled_check_passes() {
    let ws = af2_workspace_bundled();
    let (status, text, n) = run(ws, &["check"]);
    assert_eq!(status, Af2Status::Ok);
    assert!(n >= 30);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    let (status, _, _) = run(ws, &["typecheck", "--system", "af2", "--search", "\\x. x", "(!X. X -> X -> X) -> (!X. X) -> !X. X -> X"]);
    assert_eq!(status, Af2Status::Unknown);
    unsafe { af2_workspace_free(ws) };
}

#[test]
fn parsed_workspace_reports_failures() {
    let src = CString::new("sig pred P/1 fun c/0\nsubproof bad : P(c) <= P(c) -> P(c) := (ax)\n").unwrap();
    let mut ws = ptr::null_mut();
    unsafe {
        assert_eq!(af2_workspace_parse(src.as_ptr(), &mut ws), Af2Status::Ok);
        let (status, text, n) = run(ws, &["check"]);
        assert_eq!((status, n), (Af2Status::Fail, 1));
        assert!(text.starts_with("FAIL workspace: subproof bad: at root"), "{text}");
        af2_workspace_free(ws);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    let bad = CString::new("formula F := !x A\n").unwrap();
    let mut ws = ptr::null_mut();
    unsafe {
        assert_eq!(af2_workspace_parse(bad.as_ptr(), &mut ws), Af2Status::Parse);
        assert!(ws.is_null());
        assert!(!CStr::from_ptr(af2_last_error()).to_bytes().is_empty());
        assert_eq!(af2_workspace_parse(ptr::null(), &mut ws), Af2Status::NullArgument);
        let ws = af2_workspace_bundled();
        let (status, msg, _) = run(ws, &["no-such-command"]);
        assert_eq!(status, Af2Status::Usage);
        assert!(!msg.is_empty());
        assert_eq!(af2_run(ptr::null(), ptr::null(), 0, &mut ptr::null_mut()), Af2Status::NullArgument);
        af2_workspace_free(ws);
        af2_report_free(ptr::null_mut());
    }
}

#[test]
fn classify_through_the_abi() {
    let ws = af2_workspace_bundled();
    let f = CString::new("(!X. X -> X) -> P(c)").unwrap();
    let (mut pos, mut neg) = (true, false);
    unsafe {
        assert_eq!(af2_classify(ws, f.as_ptr(), &mut pos, &mut neg), Af2Status::Ok);
        assert_eq!((pos, neg), (false, true));
        let g = CString::new("Bool").unwrap();
        assert_eq!(af2_classify(ws, g.as_ptr(), &mut pos, &mut neg), Af2Status::Ok);
        assert_eq!((pos, neg), (true, false));
        af2_workspace_free(ws);
    }
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/af2lab.h")).unwrap();
    for name in [
        "af2_last_error",
        "af2_workspace_bundled",
        "af2_workspace_parse",
        "af2_workspace_free",
        "af2_run",
        "af2_report_text",
        "af2_report_status",
        "af2_report_item_count",
        "af2_report_free",
        "af2_classify",
        "AF2_STATUS_UNKNOWN = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(
        &main,
        "#include \"af2lab.h\"\nint main(void) { af2_workspace *w = af2_workspace_bundled(); af2_workspace_free(w); return AF2_STATUS_OK; }\n",
    )
    .unwrap();
    let out = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&main)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "clang", "gcc"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
