//! End-to-end runs of the `viewcheck` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    let root = std::env::var_os("VIEWCHECK_CORPUS")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus"));
    root.join(name)
}

fn viewcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viewcheck"))
        .args(args)
        .output()
        .expect("spawn viewcheck")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes `text` to a fresh file under the target temp directory.
fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("viewcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_array_program_succeeds() {
    let o = viewcheck(&["check", s(&corpus("fig2_array.vats"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("fig2_array.vats: ok"));
}

#[test]
fn check_whole_corpus_concurrently() {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "vats"))
        .collect();
    paths.sort();
    let mut args = vec!["check", "--jobs", "4"];
    args.extend(paths.iter().map(|p| s(p)));
    let o = viewcheck(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let oks: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.ends_with(": ok"))
        .map(str::to_string)
        .collect();
    let want: Vec<String> = paths
        .iter()
        .map(|p| format!("{}: ok", p.display()))
        .collect();
    assert_eq!(oks, want);
}

#[test]
fn missing_file_is_an_input_error() {
    let o = viewcheck(&["check", "no/such/file.vats"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no/such/file.vats: error"));
}

#[test]
fn parse_error_is_an_input_error() {
    let p = scratch("broken.vats", "fun f (x: int): int = \n");
    let o = viewcheck(&["check", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("broken.vats:"));
}

#[test]
fn loosened_split_guard_is_a_type_error() {
    let src = std::fs::read_to_string(corpus("fig2_array.vats")).unwrap();
    let bad = src.replacen("i <= n} .<i>.", "i <= n+1} .<i>.", 1);
    assert_ne!(src, bad);
    let p = scratch("split_guard.vats", &bad);
    let o = viewcheck(&["check", s(&p)]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("split_guard.vats:23:"), "{err}");
    assert!(err.contains("constraint:"), "{err}");
}

#[test]
fn json_diagnostics_are_machine_readable() {
    let src = std::fs::read_to_string(corpus("fig2_array.vats")).unwrap();
    let p = scratch(
        "json.vats",
        &src.replacen("i <= n} .<i>.", "i <= n+1} .<i>.", 1),
    );
    let o = viewcheck(&["check", "--json", s(&p)]);
    assert_eq!(code(&o), 1);
    let doc: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(doc["status"], "type-error");
    let d = &doc["diagnostics"][0];
    assert_eq!(d["severity"], "error");
    assert_eq!(d["line"], 23);
    assert!(d["rule"].is_string());
}

#[test]
fn explain_constraints_prints_solver_queries() {
    let o = viewcheck(&[
        "check",
        "--explain-constraints",
        s(&corpus("fig2_array.vats")),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o)
        .lines()
        .any(|l| l.contains(": note: [") && l.ends_with("(holds)")));
}

#[test]
fn run_prints_value() {
    let o = viewcheck(&["run", s(&corpus("write_read_demo.vats"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "42\n");
}

#[test]
fn run_reverse_dumps_reversed_links() {
    let o = viewcheck(&["run", "--dump-store", s(&corpus("reverse_demo.vats"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // The list 1, 2, 3 is built front to back; reversal leaves l_1 at the
    // head and follows the links to null.
    let out = stdout(&o);
    let mut lines = out.lines();
    let head = lines.next().unwrap().to_string();
    let cells: std::collections::BTreeMap<String, String> = lines
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            (k.to_string(), v.to_string())
        })
        .collect();
    let mut seen = Vec::new();
    let mut at = head;
    while at != "null" {
        let n: u64 = at.strip_prefix("l_").unwrap().parse().unwrap();
        seen.push(cells[&at].clone());
        at = cells[&format!("l_{}", n + 1)].clone();
    }
    assert_eq!(seen, ["3", "2", "1"]);
}

#[test]
fn instrumented_run_agrees() {
    let o = viewcheck(&["run", "--instrumented", s(&corpus("arraymap_demo.vats"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn run_without_main() {
    let o = viewcheck(&["run", s(&corpus("fig2_array.vats"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "no main\n");
}

#[test]
fn fuel_exhaustion_has_its_own_exit_code() {
    let p = scratch(
        "loop.vats",
        "fun loop (x: int): int = loop x\nval main = loop 0\n",
    );
    let o = viewcheck(&["run", "--fuel", "1", s(&p)]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("fuel exhausted"));
}

#[test]
fn erase_drops_proofs() {
    let o = viewcheck(&["erase", s(&corpus("fig2_array.vats"))]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("getPtr p"), "{out}");
    assert!(!out.contains("pf"), "{out}");
}

#[test]
fn erase_of_ill_typed_file_fails() {
    let src = std::fs::read_to_string(corpus("fig2_array.vats")).unwrap();
    let p = scratch(
        "erase_bad.vats",
        &src.replacen("i <= n} .<i>.", "i <= n+1} .<i>.", 1),
    );
    let o = viewcheck(&["erase", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).is_empty());
}

#[test]
fn trace_shows_the_write() {
    let o = viewcheck(&[
        "trace",
        "--check-every",
        "1",
        s(&corpus("write_read_demo.vats")),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("step 1: ")));
    assert!(out.contains("ST[l_1 := 42]"), "{out}");
    assert!(!out.contains("violation"), "{out}");
    assert!(out.ends_with("=> 42\n"));
}
