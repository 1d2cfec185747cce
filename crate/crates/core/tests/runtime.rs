mod common;

use common::*;
use viewcheck::erase::erase;
use viewcheck::runtime::{
    entails_view, store_typing_check, Machine, Mode, Outcome, StateType, Store, StuckReason,
};
use viewcheck::statics::{Sort, SortCtx, StaticTerm as S};
use viewcheck::syntax::parse_static;
use viewcheck::terms::{DynKind, DynTerm};

fn value(out: &Outcome) -> &DynTerm {
    match out {
        Outcome::Value(v) => v,
        o => panic!("expected a value, got {o:?}"),
    }
}

fn int_cells(m: &Machine) -> Vec<i64> {
    m.store
        .iter()
        .map(|(_, v)| match v.kind {
            DynKind::Int(i) => i,
            _ => panic!("non-integer cell {v}"),
        })
        .collect()
}

#[test]
fn write_then_read() {
    let c = check_ok("write_read_demo");
    for mode in [Mode::Instrumented, Mode::Erased] {
        let (m, out) = run(&c, mode, 10_000);
        assert_eq!(value(&out).to_string(), "42");
        assert!(m.store.is_empty());
    }
}

#[test]
fn array_map_increments_every_cell() {
    let c = check_ok("arraymap_demo");
    let expected: Vec<i64> = (1..=5).map(|i| i * 10 + 1).collect();
    for mode in [Mode::Instrumented, Mode::Erased] {
        let (m, out) = run(&c, mode, 100_000);
        assert_eq!(erase(value(&out)).to_string(), "l_1");
        assert_eq!(int_cells(&m), expected);
    }
}

#[test]
fn subscript_through_lemmas() {
    let c = check_ok("get_demo");
    for mode in [Mode::Instrumented, Mode::Erased] {
        let (m, out) = run(&c, mode, 10_000);
        assert_eq!(value(&out).to_string(), "30");
        assert!(m.store.is_empty());
    }
}

#[test]
fn boxed_cells_survive() {
    let c = check_ok("pair_demo");
    let (m, out) = run(&c, Mode::Instrumented, 10_000);
    assert_eq!(value(&out).to_string(), "7");
    assert_eq!(cells(&m), ["3", "4"]);

    let c = check_ok("ref_demo");
    let (m, out) = run(&c, Mode::Instrumented, 10_000);
    assert_eq!(value(&out).to_string(), "7");
    assert_eq!(cells(&m), ["7"]);
}

#[test]
fn circular_singleton_points_to_itself() {
    let c = check_ok("circlist");
    let (m, out) = run(&c, Mode::Erased, 10_000);
    assert_eq!(value(&out).to_string(), "l_1");
    assert_eq!(cells(&m), ["9", "l_1"]);
}

#[test]
fn read_after_free_gets_stuck() {
    let src = "val main = let val p = alloc 1 val _ = free (p, 1) in getPtr p end";
    let el = viewcheck::elab::elaborate(&viewcheck::syntax::parse_program(src).unwrap()).0;
    let mut m = Machine::new(&el.env, &el.funs, Mode::Erased, el.main.clone().unwrap());
    match m.run(1000, &mut |_, _| {}) {
        Outcome::Stuck(s) => assert_eq!(s.reason, StuckReason::DanglingRead(1)),
        o => panic!("expected stuck, got {o:?}"),
    }
    let c = check(src);
    assert!(!c.ok(), "the checker must reject the same program");
}

#[test]
fn double_free_gets_stuck() {
    let src = "val main = let val p = alloc 2 val _ = free (p, 2) in free (p, 2) end";
    let el = viewcheck::elab::elaborate(&viewcheck::syntax::parse_program(src).unwrap()).0;
    let mut m = Machine::new(&el.env, &el.funs, Mode::Erased, el.main.clone().unwrap());
    assert!(matches!(
        m.run(1000, &mut |_, _| {}),
        Outcome::Stuck(s) if s.reason == StuckReason::DanglingFree(1)
    ));
}

#[test]
fn divergence_runs_out_of_fuel() {
    let src = "fun loop (x: int): int = loop x\nval main = loop 0";
    let c = check(src);
    assert!(c.ok(), "{:?}", c.diagnostics);
    let (m, out) = run(&c, Mode::Erased, 500);
    assert_eq!(out, Outcome::OutOfFuel);
    assert_eq!(m.steps, 500);
}

#[test]
fn every_step_is_reported() {
    let c = check_ok("write_read_demo");
    let main = c.program.main.clone().unwrap();
    let mut m = Machine::new(&c.program.env, &c.program.funs, Mode::Instrumented, main);
    let mut rules = Vec::new();
    m.run(1000, &mut |_, i| rules.push(i.rule));
    assert_eq!(rules.len() as u64, m.steps);
    assert!(rules.contains(&"builtin") && rules.contains(&"let"));
}

fn int_store(cells: &[(u64, i64)]) -> Store {
    let mut s = Store::new();
    for (l, v) in cells {
        s.insert(*l, DynTerm::new(DynKind::Int(*v), Default::default()));
    }
    s
}

#[test]
fn store_typing_examples() {
    let env = viewcheck::decls::Env::with_prelude();
    let st = int_store(&[(1, 5)]);
    assert!(store_typing_check(
        &env,
        &st,
        &StateType::from([(1, vec![S::IntTy])])
    ));
    assert!(!store_typing_check(
        &env,
        &st,
        &StateType::from([(1, vec![S::BoolTy])])
    ));
    assert!(store_typing_check(&env, &Store::new(), &StateType::new()));
}

/// Resolves a view with one free address `l`, then fixes `l`.
fn at_l(env: &viewcheck::decls::Env, src: &str, l: u64) -> S {
    let mut ctx = SortCtx::from_binders(&[("l".into(), Sort::Addr)]);
    let v = env
        .resolve_sorted(
            &mut ctx,
            &parse_static(src).unwrap(),
            Sort::View,
            Default::default(),
        )
        .unwrap();
    v.subst(&[("l".into(), S::Addr(l))])
}

#[test]
fn array_views_unfold_over_the_store() {
    let c = check_ok("fig2_array");
    let env = &c.program.env;
    let st = int_store(&[(1, 10), (2, 20), (3, 30)]);
    let view = |s: &str| at_l(env, s, 1);
    assert_eq!(
        entails_view(env, &st, &view("arrayView(int, 3, l)")),
        Ok(true)
    );
    assert_eq!(
        entails_view(env, &st, &view("arrayView(int, 2, l)")),
        Ok(false)
    );
    assert_eq!(
        entails_view(env, &st, &view("arrayView(bool, 3, l)")),
        Ok(false)
    );
    assert_eq!(
        entails_view(env, &Store::new(), &at_l(env, "arrayView(int, 0, l)", 7)),
        Ok(true)
    );
    assert_eq!(
        entails_view(
            env,
            &st,
            &view("'(arrayView(int, 1, l), arrayView(int, 2, l+1))")
        ),
        Ok(true)
    );
}

#[test]
fn list_views_follow_pointers() {
    let c = check_ok("reverse_demo");
    let (m, out) = run(&c, Mode::Erased, 100_000);
    let env = &c.program.env;
    let DynKind::Loc(head) = erase(value(&out)).kind else {
        panic!("reverse returned a non-pointer")
    };
    assert_eq!(
        entails_view(env, &m.store, &at_l(env, "sllistView(int, 3, l)", head)),
        Ok(true)
    );
    assert_eq!(
        entails_view(env, &m.store, &at_l(env, "sllistView(int, 2, l)", head)),
        Ok(false)
    );
}
