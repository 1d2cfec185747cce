//! One line per acceptance criterion, `PASS` or `FAIL`, with the measured
//! value next to its pinned bound.

mod common;

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use viewcheck::erase::{erase, erase_program, erased_decl};
use viewcheck::runtime::{check_metatheory, Machine, Mode, Outcome};
use viewcheck::statics::{entails, CmpOp, IntOp, Sort, SortCtx, StaticTerm as S};
use viewcheck::syntax::{pretty_decl, Decl};
use viewcheck::terms::{DynKind, DynTerm};

const CORPUS_BUDGET: Duration = Duration::from_secs(5);
const MIN_MUTANTS: usize = 40;
const RUN_BUDGET: Duration = Duration::from_secs(1);
const RUN_FUEL: u64 = 1_000_000;
const METATHEORY_BUDGET: Duration = Duration::from_secs(60);
const CHECK_EVERY: u64 = 1;
const SOLVER_INSTANCES: usize = 1000;
const SOLVER_SEED: u64 = 20_061_017;
const SOLVER_VARS: usize = 3;
const BOX: i64 = 8;
const COEFF: i64 = 4;

/// Writes to the process stdout directly, past the test harness's capture,
/// so the verdicts show up in a plain `cargo test` log.
fn report(n: u32, name: &str, pass: bool, detail: String) {
    use std::io::Write;
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stdout().lock(),
        "{verdict} criterion {n} ({name}): {detail}"
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_corpus_checks() {
    let names = common::corpus_files();
    let t = Instant::now();
    let failed: Vec<String> = names
        .iter()
        .filter(|n| !common::check(&common::read(n)).ok())
        .cloned()
        .collect();
    let took = t.elapsed();
    report(
        1,
        "corpus type-checks",
        failed.is_empty() && took < CORPUS_BUDGET,
        format!(
            "{} programs, {} rejected {:?}, {:?} (bound {:?})",
            names.len(),
            failed.len(),
            failed,
            took,
            CORPUS_BUDGET
        ),
    );
}

#[test]
fn criterion_2_mutants_rejected_in_region() {
    let mutants = common::mutants::load();
    let mut accepted = Vec::new();
    let mut misplaced = Vec::new();
    for m in &mutants {
        let c = common::check(&m.source);
        if c.ok() {
            accepted.push(m.id.clone());
        } else if !c.diagnostics.iter().any(|d| m.region.contains(d.span)) {
            misplaced.push(m.id.clone());
        }
    }
    report(
        2,
        "mutants rejected",
        mutants.len() >= MIN_MUTANTS && accepted.is_empty() && misplaced.is_empty(),
        format!(
            "{} mutants (bound >= {MIN_MUTANTS}), accepted {:?}, diagnosed outside the edit {:?}",
            mutants.len(),
            accepted,
            misplaced
        ),
    );
}

#[test]
fn criterion_3_erasure_exact() {
    let c = common::check_ok("fig2_array");
    let e = erase_program(&c.program);
    let show = |f: &str| pretty_decl(&Decl::Fun(erased_decl(e.fun(f).expect("erased function"))));
    let expected = [
        (
            "getFirst",
            "fun getFirst (p) = let val x = getPtr p in x end",
        ),
        (
            "get",
            "fun get (p, i) = let val x = getFirst (p + i) in x end",
        ),
    ];
    let wrong: Vec<String> = expected
        .iter()
        .filter(|(f, want)| show(f) != *want)
        .map(|(f, _)| format!("{f}: `{}`", show(f)))
        .collect();
    report(
        3,
        "erasure matches",
        wrong.is_empty(),
        format!("2 functions, mismatches {wrong:?}"),
    );
}

fn pointer(v: &DynTerm) -> u64 {
    match erase(v).kind {
        DynKind::Loc(l) => l,
        DynKind::Null => 0,
        _ => panic!("expected a pointer, got {v}"),
    }
}

fn int(v: &DynTerm) -> i64 {
    match v.kind {
        DynKind::Int(i) => i,
        _ => panic!("expected an integer, got {v}"),
    }
}

/// Reads a heap list: value at `l`, next pointer at `l + 1`.
fn walk_list(m: &Machine, mut l: u64) -> Vec<i64> {
    let mut out = Vec::new();
    while l != 0 {
        out.push(int(m.store.read(l).expect("list cell")));
        l = pointer(m.store.read(l + 1).expect("list link"));
        assert!(out.len() <= m.store.len(), "cyclic list");
    }
    out
}

fn reverse_program(xs: &[i64]) -> String {
    let demo = common::read("reverse_demo");
    let funs = &demo[..demo.find("val main").expect("demo main")];
    let mut main = String::from("val main =\n  let\n     val '(pf | p) = '(SlsegNone () | null)\n");
    for x in xs.iter().rev() {
        main.push_str(&format!(
            "     val '(pf | p) = cons {{int}} (pf | {x}, p)\n"
        ));
    }
    main.push_str("  in\n     reverse {int} (pf | p)\n  end\n");
    format!("{funs}{main}")
}

#[test]
fn criterion_4_dynamic_results() {
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;

    let c = common::check_ok("arraymap_demo");
    let before: Vec<i64> = (1..=5).map(|i| i * 10).collect();
    let expected: Vec<i64> = before.iter().map(|x| x + 1).collect();
    for mode in [Mode::Instrumented, Mode::Erased] {
        let t = Instant::now();
        let (m, out) = common::run(&c, mode, RUN_FUEL);
        slowest = slowest.max(t.elapsed());
        let got: Vec<i64> = m.store.iter().map(|(_, v)| int(v)).collect();
        if !matches!(out, Outcome::Value(_)) || got != expected {
            problems.push(format!("arrayMap {mode:?}: {got:?}"));
        }
    }

    for n in [0usize, 1, 3, 10] {
        let xs: Vec<i64> = (1..=n as i64).map(|i| i * 7 % 11).collect();
        let oracle: Vec<i64> = xs.iter().rev().copied().collect();
        let c = common::check(&reverse_program(&xs));
        if !c.ok() {
            problems.push(format!("reverse {n}: {:?}", c.diagnostics));
            continue;
        }
        for mode in [Mode::Instrumented, Mode::Erased] {
            let t = Instant::now();
            let (m, out) = common::run(&c, mode, RUN_FUEL);
            slowest = slowest.max(t.elapsed());
            match &out {
                Outcome::Value(v) => {
                    let got = walk_list(&m, pointer(v));
                    if got != oracle {
                        problems.push(format!("reverse {n} {mode:?}: {got:?}"));
                    }
                }
                o => problems.push(format!("reverse {n} {mode:?}: {o:?}")),
            }
        }
    }
    report(
        4,
        "arrayMap and reverse",
        problems.is_empty() && slowest < RUN_BUDGET,
        format!("problems {problems:?}, slowest run {slowest:?} (bound {RUN_BUDGET:?})"),
    );
}

/// Every corpus program with a main, plus the generated reverse programs.
fn runnable() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = common::corpus_files()
        .into_iter()
        .map(|n| {
            let src = common::read(&n);
            (n, src)
        })
        .filter(|(_, src)| src.contains("val main"))
        .collect();
    for n in [0usize, 1, 3, 10] {
        let xs: Vec<i64> = (0..n as i64).collect();
        out.push((format!("reverse-{n}"), reverse_program(&xs)));
    }
    out
}

#[test]
fn criterion_5_metatheory() {
    let t = Instant::now();
    let mut problems = Vec::new();
    let mut steps = 0;
    let programs = runnable();
    for (name, src) in &programs {
        let c = common::check(src);
        assert!(c.ok(), "{name}: {:?}", c.diagnostics);
        let e = erase_program(&c.program);
        let r = check_metatheory(
            &c.program.env,
            &c.program.funs,
            &e.funs,
            c.program.main.as_ref().expect("main"),
            c.main_type.as_ref().expect("main type"),
            RUN_FUEL,
            CHECK_EVERY,
        );
        steps += r.steps;
        if !r.violations.is_empty() {
            problems.push(format!("{name}: subject reduction {:?}", r.violations));
        }
        if !matches!(r.outcome, Outcome::Value(_)) {
            problems.push(format!("{name}: progress {:?}", r.outcome));
        }
        if !r.agree {
            problems.push(format!(
                "{name}: erasure disagrees ({:?})",
                r.erased_outcome
            ));
        }
    }
    let took = t.elapsed();
    report(
        5,
        "metatheory oracles",
        problems.is_empty() && took < METATHEORY_BUDGET,
        format!(
            "{} programs, {steps} checked steps, problems {problems:?}, {took:?} (bound {METATHEORY_BUDGET:?})",
            programs.len()
        ),
    );
}

const VARS: [&str; SOLVER_VARS] = ["x", "y", "z"];

fn random_linear(rng: &mut StdRng) -> S {
    let mut t = S::Int(rng.gen_range(-COEFF..=COEFF));
    for v in VARS {
        let c = rng.gen_range(-COEFF..=COEFF);
        if c != 0 {
            let term = S::IntOp(IntOp::Mul, Box::new(S::Int(c)), Box::new(S::var(v)));
            t = S::add(t, term);
        }
    }
    t
}

fn random_atom(rng: &mut StdRng) -> S {
    let ops = [
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
        CmpOp::Eq,
        CmpOp::Ne,
    ];
    let op = ops[rng.gen_range(0..ops.len())];
    S::cmp(
        op,
        random_linear(rng),
        S::Int(rng.gen_range(-COEFF..=COEFF)),
    )
}

fn eval_int(t: &S, env: &[i64; SOLVER_VARS]) -> i64 {
    match t {
        S::Int(i) => *i,
        S::Var(x) => env[VARS.iter().position(|v| v == x).expect("known variable")],
        S::IntOp(IntOp::Add, a, b) => eval_int(a, env) + eval_int(b, env),
        S::IntOp(IntOp::Sub, a, b) => eval_int(a, env) - eval_int(b, env),
        S::IntOp(IntOp::Mul, a, b) => eval_int(a, env) * eval_int(b, env),
        S::Neg(a) => -eval_int(a, env),
        _ => panic!("not a linear term: {t}"),
    }
}

fn eval_prop(t: &S, env: &[i64; SOLVER_VARS]) -> bool {
    match t {
        S::Cmp(op, a, b) => {
            let (a, b) = (eval_int(a, env), eval_int(b, env));
            match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
            }
        }
        _ => panic!("not an atom: {t}"),
    }
}

/// `Some(false)` if the box holds a counterexample; `Some(true)` if the
/// hypotheses confine every variable to the box and none fails there.
fn brute_force(hyps: &[S], goal: &S, boxed: bool) -> Option<bool> {
    let r = -BOX..=BOX;
    for x in r.clone() {
        for y in r.clone() {
            for z in r.clone() {
                let env = [x, y, z];
                if hyps.iter().all(|h| eval_prop(h, &env)) && !eval_prop(goal, &env) {
                    return Some(false);
                }
            }
        }
    }
    boxed.then_some(true)
}

#[test]
fn criterion_6_solver_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(SOLVER_SEED);
    let ctx = SortCtx::from_binders(&VARS.map(|v| (v.to_string(), Sort::Int)));
    let mut decided = 0;
    let mut disagreements = Vec::new();
    for _ in 0..SOLVER_INSTANCES {
        let mut hyps: Vec<S> = (0..rng.gen_range(0..=3))
            .map(|_| random_atom(&mut rng))
            .collect();
        let boxed = rng.gen_bool(0.5);
        if boxed {
            for v in VARS {
                hyps.push(S::cmp(CmpOp::Ge, S::var(v), S::Int(-BOX)));
                hyps.push(S::cmp(CmpOp::Le, S::var(v), S::Int(BOX)));
            }
        }
        let goal = random_atom(&mut rng);
        let solver = entails(&ctx, &hyps, &goal);
        if let Some(truth) = brute_force(&hyps, &goal, boxed) {
            decided += 1;
            if truth != solver {
                let hs: Vec<String> = hyps.iter().map(|h| h.to_string()).collect();
                disagreements.push(format!(
                    "{} |- {goal}: solver {solver}, box {truth}",
                    hs.join(", ")
                ));
            }
        }
    }
    report(
        6,
        "solver vs brute force",
        disagreements.is_empty() && decided > SOLVER_INSTANCES / 2,
        format!(
            "{SOLVER_INSTANCES} instances, {decided} decided by the [-{BOX},{BOX}] box, disagreements {:?}",
            disagreements.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_7_pure_values_own_no_locations() {
    let mut checked = 0;
    let mut violations = Vec::new();
    for (name, src) in runnable() {
        let c = common::check(&src);
        let e = erase_program(&c.program);
        let r = check_metatheory(
            &c.program.env,
            &c.program.funs,
            &e.funs,
            c.program.main.as_ref().expect("main"),
            c.main_type.as_ref().expect("main type"),
            RUN_FUEL,
            CHECK_EVERY,
        );
        checked += r.steps + 1;
        violations.extend(
            r.purity_violations
                .into_iter()
                .map(|v| format!("{name}: {v}")),
        );
    }
    report(
        7,
        "pure values own no locations",
        violations.is_empty(),
        format!("{checked} states checked, violations {violations:?}"),
    );
}
