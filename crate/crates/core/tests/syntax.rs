mod common;

use proptest::prelude::*;
use viewcheck::syntax::{
    expr_str, parse_expr, parse_program, parse_static, pretty_program, SpanFree,
};

#[test]
fn corpus_round_trips() {
    for name in common::corpus_files() {
        let p = parse_program(&common::read(&name)).unwrap_or_else(|d| panic!("{name}: {d:?}"));
        let printed = pretty_program(&p);
        let q = parse_program(&printed)
            .unwrap_or_else(|d| panic!("{name} reprinted: {d:?}\n{printed}"));
        assert_eq!(p.strip(), q.strip(), "{name}");
        assert_eq!(
            printed,
            pretty_program(&q),
            "{name}: printing is not stable"
        );
    }
}

#[test]
fn comments_nest() {
    let p = parse_program("(* outer (* inner *) still outer *) val main = 1 // done").unwrap();
    assert!(p.main().is_some());
}

#[test]
fn syntax_errors_carry_positions() {
    let d = parse_program("fun f (x: int): int = (x +").unwrap_err();
    assert_eq!(d.rule, "syntax");
    assert!(d.span.start >= 24, "{:?}", d.span);
}

fn index() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..20).prop_map(|i| i.to_string()),
        prop::sample::select(vec!["n", "i", "l"]).prop_map(str::to_string),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*"]),
                inner.clone()
            )
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            inner.prop_map(|a| format!("~{a}")),
        ]
    })
}

fn prop_term() -> impl Strategy<Value = String> {
    let atom = (
        index(),
        prop::sample::select(vec!["<", "<=", ">", ">=", "==", "<>"]),
        index(),
    )
        .prop_map(|(a, op, b)| format!("{a} {op} {b}"));
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) && ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) || ({b})")),
            inner.prop_map(|a| format!("~({a})")),
        ]
    })
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..100).prop_map(|i| i.to_string()),
        prop::sample::select(vec!["x", "y", "p", "true", "false", "null", "'()"])
            .prop_map(str::to_string),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "<", "==", "<>"]),
                inner.clone()
            )
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(c, a, b)| format!("(if {c} then {a} else {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("let val z = {a} in {b} end")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("'({a}, {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("f ({a}, {b})")),
            (prop_term(), inner.clone(), inner)
                .prop_map(|(c, a, b)| format!("(sif {c} then {a} else {b})")),
        ]
    })
}

proptest! {
    #[test]
    fn statics_print_and_reparse(src in prop_term()) {
        let t = parse_static(&src).unwrap();
        let again = parse_static(&t.to_string()).unwrap();
        prop_assert_eq!(t, again);
    }

    #[test]
    fn expressions_print_and_reparse(src in expr()) {
        let e = parse_expr(&src).unwrap();
        let printed = expr_str(&e, 0);
        let again = parse_expr(&printed).unwrap_or_else(|d| panic!("{printed}: {d:?}"));
        prop_assert_eq!(e.strip(), again.strip());
    }
}
