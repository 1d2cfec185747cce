use proptest::prelude::*;
use viewcheck::statics::{entails, satisfiable, CmpOp, Sort, SortCtx, StaticTerm as S};
use viewcheck::syntax::parse_static;

fn ctx() -> SortCtx {
    SortCtx::from_binders(&[("x".into(), Sort::Int), ("y".into(), Sort::Int)])
}

fn p(s: &str) -> S {
    parse_static(s).unwrap()
}

#[test]
fn textbook_entailments() {
    let c = ctx();
    assert!(entails(&c, &[p("x >= 0"), p("y == x + 1")], &p("y > 0")));
    assert!(!entails(&c, &[p("x >= 0")], &p("x > 0")));
    assert!(
        entails(&c, &[p("2 * x == 2 * y + 1")], &p("x == 0")),
        "no integer solution"
    );
    assert!(entails(
        &c,
        &[p("1 <= 3 * x"), p("3 * x <= 2")],
        &p("x == 42")
    ));
    assert!(entails(&c, &[p("x >= 0"), p("x <= 0")], &p("x == 0")));
    assert!(entails(&c, &[], &p("x < y || x >= y")));
}

#[test]
fn satisfiability() {
    let c = ctx();
    assert!(satisfiable(&c, &[p("x > 3"), p("x < 5")]));
    assert!(!satisfiable(&c, &[p("x > 3"), p("x < 4")]));
}

fn lin() -> impl Strategy<Value = (i64, i64, i64)> {
    (-4i64..=4, -4i64..=4, -4i64..=4)
}

fn atom((a, b, k): (i64, i64, i64), op: usize) -> (S, impl Fn(i64, i64) -> bool) {
    let ops = [
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
        CmpOp::Eq,
        CmpOp::Ne,
    ];
    let t = p(&format!("{a} * x + {b} * y"));
    let f = move |x: i64, y: i64| {
        let v = a * x + b * y;
        [v < k, v <= k, v > k, v >= k, v == k, v != k][op]
    };
    (S::cmp(ops[op], t, S::Int(k)), f)
}

proptest! {
    #[test]
    fn entailment_is_sound_on_a_box(h in lin(), hop in 0usize..6, g in lin(), gop in 0usize..6) {
        let (hs, hf) = atom(h, hop);
        let (gs, gf) = atom(g, gop);
        let box_hyps = [p("x >= -6"), p("x <= 6"), p("y >= -6"), p("y <= 6")];
        let mut hyps = box_hyps.to_vec();
        hyps.push(hs);
        let truth = (-6..=6).all(|x| (-6..=6).all(|y| !hf(x, y) || gf(x, y)));
        prop_assert_eq!(entails(&ctx(), &hyps, &gs), truth);
    }
}
