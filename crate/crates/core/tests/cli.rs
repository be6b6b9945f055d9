use std::path::Path;
use std::process::{Command, Output};

fn af2lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_af2lab")).args(args).env_remove("AF2LAB_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn corpus_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    for e in std::fs::read_dir(src).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    dir
}

#[test]
fn check_passes_every_item() {
    let o = af2lab(&["check"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().count() >= 30);
    assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");
}

#[test]
fn af2_search_for_identity_is_undecided() {
    let o = af2lab(&["typecheck", "--system", "af2", "--search", "\\x. x", "(!X. X -> X -> X) -> (!X. X) -> !X. X -> X"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("not found"));
}

#[test]
fn af2s_search_for_identity_succeeds() {
    let o = af2lab(&["typecheck", "--system", "af2s", "--search", "\\x. x", "(!X. X -> X -> X) -> (!X. X) -> !X. X -> X"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn complete_bool() {
    let o = af2lab(&["complete", "--type", "Bool", "--size", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let agreed: Vec<&str> = out.lines().filter(|l| l.ends_with("TYPE In SEM In AGREE yes")).collect();
    assert_eq!(agreed, ["TERM \\x. \\y. x TYPE In SEM In AGREE yes", "TERM \\x. \\y. y TYPE In SEM In AGREE yes"]);
    assert!(out.contains("AGREEMENT 114/114 UNKNOWN 0"), "{out}");
}

#[test]
fn classify_output() {
    let o = af2lab(&["classify", "(!X. X -> X) -> P(c)"]);
    assert_eq!(stdout(&o), "pos=false neg=true\n");
}

#[test]
fn transform_and_witness() {
    let o = af2lab(&["transform", "--to", "af2sub", "n2_af2s"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("judgment AF2sub empty |- \\f. \\x. f (f x) : "), "{}", stdout(&o));
    let o = af2lab(&["eta-witness", "id_af2eta"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("judgment AF2 empty |- \\x. \\z. x z"));
}

#[test]
fn reduce_reports_budget() {
    let o = af2lab(&["reduce", "--budget", "3", "(\\x. x x) (\\x. x x)"]);
    assert_eq!(o.status.code(), Some(3));
    let o = af2lab(&["reduce", "--strategy", "eta", "\\x. f x"]);
    assert_eq!(stdout(&o).lines().next(), Some("f"));
}

#[test]
fn usage_errors() {
    assert_eq!(af2lab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(af2lab(&["classify", "!x A"]).status.code(), Some(2));
    assert_eq!(af2lab(&["typecheck", "--system", "af3", "--search", "x", "P(c)"]).status.code(), Some(2));
    assert_eq!(af2lab(&["-w", "/nonexistent.af2", "check"]).status.code(), Some(2));
}

#[test]
fn workspace_file_option() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("w.af2");
    std::fs::write(&p, "sig pred P/1 fun c/0\nsubproof bad : P(c) <= P(c) -> P(c) := (ax)\n").unwrap();
    let o = af2lab(&["-w", p.to_str().unwrap(), "check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL w.af2: subproof bad: at root"), "{}", stdout(&o));
}

#[test]
fn verify_corpus_passes() {
    let o = af2lab(&["verify-corpus"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS ")).count(), 11);
}

#[test]
fn mutated_subproof_fails_once() {
    let dir = corpus_copy();
    let p = dir.path().join("subproofs.af2");
    let text = std::fs::read_to_string(&p).unwrap();
    let mutated = text.replace("(mono (ax) (forall-elim {[] P(0)} (ax)))", "(mono (ax) (forall-elim {[] P(c)} (ax)))");
    assert_ne!(text, mutated);
    std::fs::write(&p, mutated).unwrap();
    let o = af2lab(&["verify-corpus", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let fails: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{out}");
    assert!(fails[0].contains("subproof mono: at root.1"), "{}", fails[0]);
}

#[test]
fn starved_budget_is_unknown() {
    let o = Command::new(env!("CARGO_BIN_EXE_af2lab")).args(["verify-corpus"]).env("AF2LAB_BUDGET", "1").output().unwrap();
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(3), "{out}");
    assert!(out.lines().any(|l| l.starts_with("UNKNOWN")));
    let o = af2lab(&["verify-corpus", "--budget", "1", "--only", "6"]);
    assert_eq!(o.status.code(), Some(3));
}
