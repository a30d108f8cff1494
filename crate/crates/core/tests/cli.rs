use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Self {
        Scratch(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

fn bendsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bendsat")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const GADGET: &str = "# the {0,1} gadget\nx >= 0\nx <= 1\nx <= 0 | x >= 1\n";
const DOUBLING: &str = "-2 x + y >= 0\nx - 2 y >= 0\nx >= 1\n";

#[test]
fn gadget_witness_as_json() {
    let dir = Scratch::new();
    let f = dir.file("gadget.bnd", GADGET);
    let out = bendsat(&["solve", f.to_str().unwrap(), "--witness", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.trim() == r#"{"status":"sat","witness":{"x":"1"}}"# || text.trim() == r#"{"status":"sat","witness":{"x":"0"}}"#,
        "{text}"
    );
}

#[test]
fn unsat_with_certificate_checks() {
    let dir = Scratch::new();
    let f = dir.file("doubling.bnd", DOUBLING);
    let out = bendsat(&["solve", f.to_str().unwrap(), "--certificate", "--oracle"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("UNSAT\nhandcuff-refutation v1\n"), "{text}");
    let cert = dir.file("cert.txt", text.strip_prefix("UNSAT\n").unwrap());
    let check = bendsat(&["check", f.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    assert_eq!(stdout(&check), "VALID\n");

    let json = bendsat(&["solve", f.to_str().unwrap(), "--certificate", "--format", "json"]);
    let cert = dir.file("cert.json", &stdout(&json));
    let check = bendsat(&["check", f.to_str().unwrap(), "--certificate", cert.to_str().unwrap(), "--format", "json"]);
    assert_eq!(stdout(&check).trim(), r#"{"valid":true,"reason":null}"#);

    let weaker = dir.file("weaker.bnd", "-2 x + y >= 0\nx - 2 y >= 0\n");
    let check = bendsat(&["check", weaker.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(1));
    assert!(stdout(&check).starts_with("INVALID: "));
}

#[test]
fn witness_files() {
    let dir = Scratch::new();
    let f = dir.file("gadget.bnd", GADGET);
    let half = dir.file("half.json", r#"{"x": "1/2"}"#);
    let one = dir.file("one.json", r#"{"status":"sat","witness":{"x":"1"}}"#);
    assert_eq!(bendsat(&["check", f.to_str().unwrap(), "--witness", half.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bendsat(&["check", f.to_str().unwrap(), "--witness", one.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn printed_staircase_is_satisfiable() {
    let dir = Scratch::new();
    let text = "x > 0\ny < 3\nx >= 0 | y <= 0\nx >= 1 | y <= 1\nx >= 2 | y <= 2\nx >= 3 | y <= 3\nx - z < 0\nz - y < 0\n";
    let f = dir.file("staircase.bnd", text);
    let out = bendsat(&["solve", f.to_str().unwrap(), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "SAT\n");
}

#[test]
fn malformed_input_exits_2() {
    let dir = Scratch::new();
    let bad = dir.file("bad.bnd", "x >= 0\nx >= 1 | x + y <= 3 | y >= 2\n");
    let out = bendsat(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":2:"), "{err}");

    let eq = dir.file("eq.bnd", "x = 1\n");
    assert_eq!(bendsat(&["solve", eq.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bendsat(&["solve", "/nonexistent/file.bnd"]).status.code(), Some(2));
    assert_eq!(bendsat(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn fuzz_summary() {
    let out = bendsat(&["fuzz", "--seed", "3", "--count", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("40 instances, ") && text.ends_with(", 0 disagreements\n"), "{text}");
}
