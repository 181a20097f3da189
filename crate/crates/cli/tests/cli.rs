//! End-to-end tests spawning the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn seqren(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqren"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

#[test]
fn struct_size_paper_values() {
    let o = seqren(&["struct", "size", "{a}[a;~a]"]);
    assert_eq!(stdout(&o).trim(), "3");
    let o = seqren(&["struct", "size", "{a}[b;~b]"]);
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn struct_eq_and_exit_codes() {
    let o = seqren(&["struct", "eq", "[a;b]", "[b;a]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");
    let o = seqren(&["struct", "eq", "<a;b>", "<b;a>"]);
    assert_eq!(o.status.code(), Some(1));
    let o = seqren(&["struct", "eq", "<a;b", "<a;b>"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn struct_legal() {
    assert_eq!(seqren(&["struct", "legal", "{a}[~a;b]"]).status.code(), Some(0));
    assert_eq!(seqren(&["struct", "legal", "(a;{b}<a;~a>)"]).status.code(), Some(1));
}

#[test]
fn parse_term_reads_stdin_and_files() {
    use std::io::Write;
    let dir = tempdir();
    let file = dir.join("term.lam");
    std::fs::write(&file, "(\\x. x) y\n").unwrap();
    let o = seqren(&["parse-term", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(\\x. x) y");

    // nonlinear terms come back as a negative answer
    let bad = dir.join("bad.lam");
    std::fs::write(&bad, "\\x. x x").unwrap();
    let o = seqren(&["parse-term", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let mut child = Command::new(env!("CARGO_BIN_EXE_seqren"))
        .args(["parse-term", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(b"x[x:=y]").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "x[x:=y]");
}

#[test]
fn reduce_writes_trace() {
    let dir = tempdir();
    let trace = dir.join("trace.json");
    let o = seqren(&["reduce", "(\\x. x) y", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "y");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(doc["steps"].as_array().unwrap().len(), 2);
    assert_eq!(doc["end"], "normal_form");
}

#[test]
fn simulate_certificate_round_trips_through_check() {
    let dir = tempdir();
    let cert = dir.join("cert.json");
    let o = seqren(&["simulate", "(\\x. x) y", "--cert", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("premise: <y;~ch_o>"));

    // sidecar carries the provenance
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("cert.json.sidecar.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["reduct"], "y");
    assert_eq!(sidecar["output"], "ch_o");

    // a fresh process re-accepts the certificate
    let o = seqren(&["check", cert.to_str().unwrap(), "--allow", "sbvr"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    // the q_up from the sub_var step trips the down-fragment filter
    let o = seqren(&["check", cert.to_str().unwrap(), "--allow", "down"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("rule census"), "missing census: {err}");
    assert!(err.contains("q_up"));
}

#[test]
fn prove_and_prove_reduction() {
    let dir = tempdir();
    let cert = dir.join("proof.json");
    let o = seqren(&["prove", "[a;~a]", "--cert", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = seqren(&["check", cert.to_str().unwrap(), "--allow", "down"]);
    assert_eq!(o.status.code(), Some(0));

    let o = seqren(&["prove", "(a;~a)"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "unprovable");

    let o = seqren(&["prove-reduction", "x[x:=y]", "y"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = seqren(&["prove-reduction", "y", "z"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn imll_compile_checks() {
    let dir = tempdir();
    let proof = dir.join("proof.json");
    std::fs::write(
        &proof,
        r#"{"lolli": {"sub": {"ax": "a"}, "index": 0}}"#,
    )
    .unwrap();
    let cert = dir.join("imll-cert.json");
    let o = seqren(&[
        "imll",
        "compile",
        proof.to_str().unwrap(),
        "--cert",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("conclusion: [~a;a]"), "got: {text}");
    assert!(text.contains("premise: <~a;a>"));
    let o = seqren(&["check", cert.to_str().unwrap(), "--allow", "sbvr"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn byte_stable_output() {
    let a = seqren(&["simulate", "(\\x. x) y"]);
    let b = seqren(&["simulate", "(\\x. x) y"]);
    assert_eq!(a.stdout, b.stdout);
    let a = seqren(&["struct", "normalize", "{b}[b;~b;c]"]);
    let b = seqren(&["struct", "normalize", "{b}[b;~b;c]"]);
    assert_eq!(a.stdout, b.stdout);
}

fn tempdir() -> std::path::PathBuf {
    let base = std::env::temp_dir().join(format!(
        "seqren-cli-test-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    if !Path::new(&base).exists() {
        std::fs::create_dir_all(&base).unwrap();
    }
    base
}
