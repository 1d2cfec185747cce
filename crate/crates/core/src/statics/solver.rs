//! Entailment and satisfiability of propositions over integers and
//! addresses, by DNF expansion and the Omega test.

use std::collections::BTreeMap;

use super::linform::{normalize, Atom, LinForm};
use super::omega::{self, Constraint};
use super::sort::SortCtx;
use super::term::{CmpOp, Sort, StaticTerm as S};

/// A linear literal: `form >= 0` or `form = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Lit {
    form: LinForm,
    eq: bool,
}

#[derive(Clone, Debug)]
enum Formula {
    True,
    False,
    Lit(Lit),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

const MAX_DISJUNCTS: usize = 4096;

fn ge0(form: LinForm) -> Formula {
    Formula::Lit(Lit { form, eq: false })
}

fn eq0(form: LinForm) -> Formula {
    Formula::Lit(Lit { form, eq: true })
}

fn is_bool_term(ctx: &SortCtx, t: &S) -> bool {
    match t {
        S::Bool(_) | S::Cmp(..) | S::Not(_) | S::And(..) | S::Or(..) | S::Implies(..) => true,
        S::Var(n) => ctx.lookup(n) == Some(Sort::Bool),
        _ => false,
    }
}

/// Boolean unknowns are integer atoms restricted to {0, 1}; `x` holds when `x >= 1`.
fn bool_atom(t: &S) -> Atom {
    match t {
        S::Var(n) => Atom::Var(n.clone()),
        S::Meta(m) => Atom::Meta(*m),
        other => Atom::Opaque(other.to_string()),
    }
}

/// Translates `t` (or its negation, when `positive` is false).
fn translate(ctx: &SortCtx, t: &S, positive: bool, bools: &mut Vec<Atom>) -> Formula {
    match t {
        S::Bool(b) => {
            if *b == positive {
                Formula::True
            } else {
                Formula::False
            }
        }
        S::Not(a) => translate(ctx, a, !positive, bools),
        S::And(a, b) | S::Or(a, b) => {
            let fa = translate(ctx, a, positive, bools);
            let fb = translate(ctx, b, positive, bools);
            if matches!(t, S::And(..)) == positive {
                Formula::And(vec![fa, fb])
            } else {
                Formula::Or(vec![fa, fb])
            }
        }
        S::Implies(a, b) => {
            let fa = translate(ctx, a, !positive, bools);
            let fb = translate(ctx, b, positive, bools);
            if positive {
                Formula::Or(vec![fa, fb])
            } else {
                Formula::And(vec![fa, fb])
            }
        }
        S::Cmp(op, a, b) if is_bool_term(ctx, a) || is_bool_term(ctx, b) => {
            // boolean (in)equality is (non-)equivalence
            let same = (*op == CmpOp::Eq) == positive;
            let pa = translate(ctx, a, true, bools);
            let na = translate(ctx, a, false, bools);
            let pb = translate(ctx, b, true, bools);
            let nb = translate(ctx, b, false, bools);
            if same {
                Formula::Or(vec![Formula::And(vec![pa, pb]), Formula::And(vec![na, nb])])
            } else {
                Formula::Or(vec![Formula::And(vec![pa, nb]), Formula::And(vec![na, pb])])
            }
        }
        S::Cmp(op, a, b) => {
            let op = if positive { *op } else { op.negate() };
            let (la, lb) = (normalize(a), normalize(b));
            let one = LinForm::constant(1);
            match op {
                CmpOp::Lt => ge0(lb.sub(&la).sub(&one)),
                CmpOp::Le => ge0(lb.sub(&la)),
                CmpOp::Gt => ge0(la.sub(&lb).sub(&one)),
                CmpOp::Ge => ge0(la.sub(&lb)),
                CmpOp::Eq => eq0(la.sub(&lb)),
                CmpOp::Ne => {
                    Formula::Or(vec![ge0(la.sub(&lb).sub(&one)), ge0(lb.sub(&la).sub(&one))])
                }
            }
        }
        other => {
            let a = bool_atom(other);
            if !bools.contains(&a) {
                bools.push(a.clone());
            }
            let x = LinForm::atom(a);
            if positive {
                ge0(x.sub(&LinForm::constant(1)))
            } else {
                ge0(x.scale(-1))
            }
        }
    }
}

/// Disjunctive normal form; `None` when it would exceed the size cap.
fn dnf(f: &Formula) -> Option<Vec<Vec<Lit>>> {
    match f {
        Formula::True => Some(vec![vec![]]),
        Formula::False => Some(vec![]),
        Formula::Lit(l) => Some(vec![vec![l.clone()]]),
        Formula::Or(fs) => {
            let mut out = Vec::new();
            for f in fs {
                out.extend(dnf(f)?);
                if out.len() > MAX_DISJUNCTS {
                    return None;
                }
            }
            Some(out)
        }
        Formula::And(fs) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            for f in fs {
                let d = dnf(f)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                if next.len() > MAX_DISJUNCTS {
                    return None;
                }
                acc = next;
            }
            Some(acc)
        }
    }
}

/// Decides one conjunction, adding domain facts for address (`>= 0`) and
/// boolean (`0..=1`) unknowns. `None` means the search gave up.
fn conj_satisfiable(ctx: &SortCtx, lits: &[Lit], bools: &[Atom]) -> Option<bool> {
    let mut index: BTreeMap<Atom, usize> = BTreeMap::new();
    for l in lits {
        for a in l.form.terms.keys() {
            let n = index.len();
            index.entry(a.clone()).or_insert(n);
        }
    }
    let n = index.len();
    let dense = |form: &LinForm| {
        let mut v = vec![0i128; n];
        for (a, c) in &form.terms {
            v[index[a]] = *c;
        }
        v
    };
    let mut cs: Vec<Constraint> = lits
        .iter()
        .map(|l| Constraint {
            coeffs: dense(&l.form),
            constant: l.form.constant,
            eq: l.eq,
        })
        .collect();
    for (a, &i) in &index {
        let is_bool =
            bools.contains(a) || matches!(a, Atom::Var(v) if ctx.lookup(v) == Some(Sort::Bool));
        let is_addr = matches!(a, Atom::Var(v) if ctx.lookup(v) == Some(Sort::Addr));
        if is_bool || is_addr {
            let mut c = vec![0; n];
            c[i] = 1;
            cs.push(Constraint::geq(c, 0));
        }
        if is_bool {
            let mut c = vec![0; n];
            c[i] = -1;
            cs.push(Constraint::geq(c, 1));
        }
    }
    omega::satisfiable(n, &cs).ok()
}

/// Three-valued satisfiability: `None` if undecided within budget.
fn check_sat(ctx: &SortCtx, props: &[&S]) -> Option<bool> {
    let mut bools = Vec::new();
    let f = Formula::And(
        props
            .iter()
            .map(|p| translate(ctx, p, true, &mut bools))
            .collect(),
    );
    let ds = dnf(&f)?;
    let mut unknown = false;
    for d in &ds {
        match conj_satisfiable(ctx, d, &bools) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => unknown = true,
        }
    }
    if unknown {
        None
    } else {
        Some(false)
    }
}

/// `Σ; hyps ⊨ goal`: holds iff `hyps ∧ ¬goal` has no integer model.
/// Undecided queries count as not entailed.
pub fn entails(ctx: &SortCtx, hyps: &[S], goal: &S) -> bool {
    let neg = S::Not(Box::new(goal.clone()));
    let mut props: Vec<&S> = hyps.iter().collect();
    props.push(&neg);
    check_sat(ctx, &props) == Some(false)
}

/// False iff the hypotheses have no integer model; undecided counts as
/// satisfiable.
pub fn satisfiable(ctx: &SortCtx, hyps: &[S]) -> bool {
    let props: Vec<&S> = hyps.iter().collect();
    check_sat(ctx, &props) != Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statics::term::CmpOp::*;

    fn v(n: &str) -> S {
        S::var(n)
    }
    fn c(op: CmpOp, a: S, b: S) -> S {
        S::cmp(op, a, b)
    }
    fn ints(names: &[&str]) -> SortCtx {
        SortCtx::from_binders(
            &names
                .iter()
                .map(|n| (n.to_string(), Sort::Int))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn predecessor_of_positive_is_natural() {
        let ctx = ints(&["n"]);
        let hyps = [c(Ge, v("n"), S::Int(0)), S::not(S::eq(v("n"), S::Int(0)))];
        let goal = c(Ge, S::sub(v("n"), S::Int(1)), S::Int(0));
        assert!(entails(&ctx, &hyps, &goal));
    }

    #[test]
    fn split_guard_gives_nonnegative_remainder() {
        let ctx = ints(&["i", "n"]);
        let hyps = [c(Le, S::Int(0), v("i")), c(Le, v("i"), v("n"))];
        assert!(entails(
            &ctx,
            &hyps,
            &c(Ge, S::sub(v("n"), v("i")), S::Int(0))
        ));
    }

    #[test]
    fn zero_is_a_countermodel() {
        let ctx = ints(&["i"]);
        assert!(!entails(
            &ctx,
            &[c(Ge, v("i"), S::Int(0))],
            &c(Gt, v("i"), S::Int(0))
        ));
    }

    #[test]
    fn satisfiability_examples() {
        let ctx = ints(&["n", "i"]);
        assert!(!satisfiable(
            &ctx,
            &[c(Gt, v("n"), S::Int(0)), S::eq(v("n"), S::Int(0))]
        ));
        assert!(satisfiable(&ctx, &[]));
        assert!(satisfiable(
            &ctx,
            &[
                c(Le, S::Int(0), v("i")),
                c(Le, v("i"), v("n")),
                S::eq(v("i"), S::Int(0)),
                S::eq(v("n"), S::Int(0))
            ]
        ));
    }

    #[test]
    fn addresses_are_non_negative_and_null_is_zero() {
        let ctx = SortCtx::from_binders(&[("l".into(), Sort::Addr)]);
        assert!(entails(&ctx, &[], &c(Ge, v("l"), S::Addr(0))));
        // l <> null, so l >= 1
        assert!(entails(
            &ctx,
            &[c(Ne, v("l"), S::Addr(0))],
            &c(Gt, v("l"), S::Addr(0))
        ));
    }

    #[test]
    fn booleans_range_over_zero_and_one() {
        let ctx = SortCtx::from_binders(&[("b".into(), Sort::Bool)]);
        let t = S::eq(v("b"), S::Bool(true));
        let f = S::eq(v("b"), S::Bool(false));
        assert!(entails(
            &ctx,
            &[],
            &S::Or(Box::new(t.clone()), Box::new(f.clone()))
        ));
        assert!(!satisfiable(&ctx, &[t, f]));
    }

    #[test]
    fn disjunctive_hypotheses_split() {
        let ctx = ints(&["i"]);
        let hyp = S::Or(
            Box::new(S::eq(v("i"), S::Int(0))),
            Box::new(S::eq(v("i"), S::Int(1))),
        );
        assert!(entails(&ctx, &[hyp.clone()], &c(Le, v("i"), S::Int(1))));
        assert!(!entails(&ctx, &[hyp], &S::eq(v("i"), S::Int(0))));
    }
}
