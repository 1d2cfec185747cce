mod common;

use viewcheck::erase::{erase_program, erased_decl, is_erased};
use viewcheck::syntax::{pretty_decl, Decl};

fn erased(program: &str, fun: &str) -> String {
    let c = common::check_ok(program);
    let e = erase_program(&c.program);
    let f = e
        .fun(fun)
        .unwrap_or_else(|| panic!("no `{fun}` after erasure"));
    pretty_decl(&Decl::Fun(erased_decl(f)))
}

#[test]
fn get_first_erases_to_a_load() {
    assert_eq!(
        erased("fig2_array", "getFirst"),
        "fun getFirst (p) = let val x = getPtr p in x end"
    );
}

#[test]
fn get_erases_to_an_offset_load() {
    assert_eq!(
        erased("fig2_array", "get"),
        "fun get (p, i) = let val x = getFirst (p + i) in x end"
    );
}

#[test]
fn proof_functions_vanish() {
    let c = common::check_ok("fig2_array");
    let e = erase_program(&c.program);
    assert!(e.fun("splitLemma").is_none());
    assert!(e.fun("unsplitLemma").is_none());
}

#[test]
fn erased_terms_mention_no_proofs() {
    for name in common::corpus_files() {
        let c = common::check_ok(&name);
        let e = erase_program(&c.program);
        for f in &e.funs {
            if let viewcheck::terms::FunBody::Dyn(b) = &f.body {
                assert!(is_erased(b), "{name}: {}", f.sig.name);
            }
        }
        if let Some(m) = &e.main {
            assert!(is_erased(m), "{name}: main");
        }
        let printed = e.pretty();
        assert!(
            !printed.contains("prval") && !printed.contains('|'),
            "{name}:\n{printed}"
        );
    }
}

#[test]
fn local_functions_lose_their_types() {
    let out = erased("fig10_reverse", "reverse");
    assert!(out.contains("fun rev (p1, p2)"), "{out}");
    assert!(!out.contains("ptr"), "{out}");
}
