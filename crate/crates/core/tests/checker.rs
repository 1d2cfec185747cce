mod common;

use viewcheck::{CheckedProgram, Options};

const ARRAY: &str = "dataview arrayView (type, int, addr) =
  | {a:type, l:addr} ArrayNone (a, 0, l)
  | {a:type, n:int, l:addr | n >= 0} ArraySome (a, n+1, l) of (a @ l, arrayView (a, n, l+1))
";

fn rules(src: &str) -> Vec<String> {
    let c = common::check(src);
    c.diagnostics.iter().map(|d| d.rule.clone()).collect()
}

fn with_array(body: &str) -> Vec<String> {
    rules(&format!("{ARRAY}\n{body}"))
}

#[test]
fn every_corpus_program_checks() {
    for name in common::corpus_files() {
        common::check_ok(&name);
    }
}

#[test]
fn main_types() {
    let ty = |n: &str| common::check_ok(n).main_type.map(|t| t.to_string());
    assert_eq!(ty("write_read_demo").as_deref(), Some("int(42)"));
    assert_eq!(ty("get_demo").as_deref(), Some("int"));
    assert_eq!(ty("fig2_array"), None);
}

#[test]
fn proofs_are_linear() {
    let r = rules(
        "fun dup {a:type, l:addr} (pf: a @ l | p: ptr l): '(a @ l, a @ l | unit) = '(pf, pf | '())",
    );
    assert_eq!(r, ["linear"]);
}

#[test]
fn proofs_cannot_leak() {
    let r = rules("fun drop {a:type, l:addr} (pf: a @ l | p: ptr l): unit = '()");
    assert_eq!(r, ["linear"]);
}

#[test]
fn reading_needs_the_view() {
    let r = rules("fun bad {l:addr} (p: ptr l): int = getPtr p");
    assert!(!r.is_empty());
}

#[test]
fn guards_are_obligations() {
    let r = with_array(
        "fun first {a:type, n:int, l:addr | n >= 0} (pf: arrayView (a,n,l) | p: ptr l): '(arrayView (a,n,l) | a) =
  let prval ArraySome (pf1, pf2) = pf val '(pf1 | x) = getPtr (pf1 | p) in '(ArraySome (pf1, pf2) | x) end",
    );
    assert_eq!(r, ["nonexhaustive"]);
}

#[test]
fn index_mismatch() {
    let r = with_array(
        "fun first {a:type, n:int, l:addr | n > 0} (pf: arrayView (a,n,l) | p: ptr l): '(arrayView (a,n,l) | a) =
  let prval ArraySome (pf1, pf2) = pf val '(pf1 | x) = getPtr (pf1 | p + 1) in '(ArraySome (pf1, pf2) | x) end",
    );
    assert_eq!(r, ["index"]);
}

#[test]
fn prfun_needs_a_decreasing_metric() {
    let r = with_array(
        "prfun loop {a:type, n:int, l:addr | n >= 0} .<n>. (pf: arrayView (a, n, l)): arrayView (a, n, l) =
  loop {a, n, l} (pf)",
    );
    assert_eq!(r, ["termination"]);
}

#[test]
fn branches_consume_alike() {
    let r = rules(
        "fun f {l:addr} (pf: int @ l | p: ptr l, b: bool): '(int @ l | unit) =
  if b then '(pf | '()) else let val '(pf | _) = setPtr (pf | p, 1) in '(pf | '()) end",
    );
    assert!(r.is_empty(), "{r:?}");
    let r = rules(
        "fun f {l:addr} (pf: int @ l | p: ptr l, b: bool): '(int @ l | unit) =
  if b then '(pf | '()) else let val '(pf2 | _) = setPtr (pf | p, 1) in '(pf | '()) end",
    );
    assert!(!r.is_empty());
}

#[test]
fn free_needs_the_whole_array() {
    let r = rules("val main = let val '(pf | p) = alloc 2 in free (pf | p, 1) end");
    assert!(!r.is_empty());
    let r = rules("val main = let val '(pf | p) = alloc 2 in free (pf | p, 2) end");
    assert!(r.is_empty(), "{r:?}");
}

#[test]
fn boxed_views_are_shared_but_not_freed() {
    let r = rules(
        "val main = let
  val '(pf | p) = alloc 1
  prval ArraySome (pf0, ArrayNone ()) = pf
  val b = viewbox pf0
in free (ArraySome (pf0, ArrayNone ()) | p, 1) end",
    );
    assert!(!r.is_empty());
}

#[test]
fn unknown_functions_fail_elaboration() {
    assert_eq!(rules("val main = nosuch 1"), ["elab"]);
    assert_eq!(rules("fun f (x: int): int = y"), ["elab"]);
}

#[test]
fn explained_constraints_are_recorded() {
    let src = common::read("fig2_array");
    let opts = Options {
        explain_constraints: true,
        ..Options::default()
    };
    let c = CheckedProgram::from_source(&src, opts).unwrap();
    assert!(c.ok());
    assert!(!c.explained.is_empty());
    assert!(c.explained.iter().all(|e| e.holds));
    assert!(c.explained.iter().any(|e| e.rule == "guard"));
}

#[test]
fn proof_trace_covers_lemmas() {
    let src = common::read("fig2_array");
    let opts = Options {
        trace_proofs: true,
        ..Options::default()
    };
    let c = CheckedProgram::from_source(&src, opts).unwrap();
    assert!(c.proof_log.iter().any(|(_, s)| s.contains("splitLemma")));
}

#[test]
fn diagnostics_point_into_the_source() {
    let src = "fun f (x: int): bool = x";
    let c = common::check(src);
    let d = &c.diagnostics[0];
    assert_eq!(d.rule, "type-mismatch");
    assert_eq!(&src[d.span.start..d.span.end], "x");
}
