//! Store typing, store entailment, and the step-by-step metatheory runner.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::check::Checker;
use crate::decls::Env;
use crate::erase::erase;
use crate::statics::{CmpOp, IntOp, Name, Sort, StaticTerm as S};
use crate::terms::{DynDecl, DynKind, DynTerm, FunDef, ProofDecl, ProofKind, ProofTerm};

use super::eval::{decide, Machine, Mode, Outcome};
use super::store::Store;

/// Location to the types the term's proofs claim for it.
pub type StateType = BTreeMap<u64, Vec<S>>;

fn walk_proof(p: &ProofTerm, boxed: bool, f: &mut dyn FnMut(u64, &S, bool)) {
    match &p.kind {
        ProofKind::Loc(l, t) => f(*l, t, boxed),
        ProofKind::Tuple(xs) | ProofKind::Con(_, xs) => {
            xs.iter().for_each(|x| walk_proof(x, boxed, f))
        }
        ProofKind::Call { func, args, .. } => {
            let b = boxed || func == "viewbox";
            args.iter().for_each(|x| walk_proof(x, b, f))
        }
        ProofKind::App(a, b) => {
            walk_proof(a, boxed, f);
            walk_proof(b, boxed, f);
        }
        ProofKind::Lam { body, .. } | ProofKind::Ann(body, _) => walk_proof(body, boxed, f),
        ProofKind::Sif(_, a, b) => {
            walk_proof(a, boxed, f);
            walk_proof(b, boxed, f);
        }
        ProofKind::Let(ds, body) => {
            for d in ds {
                if let ProofDecl::Val { rhs, .. } = d {
                    walk_proof(rhs, boxed, f);
                }
            }
            walk_proof(body, boxed, f);
        }
        ProofKind::Var(_) => {}
    }
}

fn walk_dyn(t: &DynTerm, f: &mut dyn FnMut(u64, &S, bool)) {
    let all =
        |xs: &[DynTerm], f: &mut dyn FnMut(u64, &S, bool)| xs.iter().for_each(|x| walk_dyn(x, f));
    let proofs = |xs: &[ProofTerm], f: &mut dyn FnMut(u64, &S, bool)| {
        xs.iter().for_each(|x| walk_proof(x, false, f))
    };
    match &t.kind {
        DynKind::Tuple { proofs: ps, items } => {
            proofs(ps.as_deref().unwrap_or(&[]), f);
            all(items, f);
        }
        DynKind::Call {
            inv,
            proofs: ps,
            args,
            ..
        } => {
            proofs(inv, f);
            proofs(ps, f);
            all(args, f);
        }
        DynKind::App {
            func,
            proofs: ps,
            args,
        } => {
            walk_dyn(func, f);
            proofs(ps, f);
            all(args, f);
        }
        DynKind::BinOp(_, a, b) | DynKind::Sif(_, a, b) => {
            walk_dyn(a, f);
            walk_dyn(b, f);
        }
        DynKind::If(c, a, b) => {
            walk_dyn(c, f);
            walk_dyn(a, f);
            walk_dyn(b, f);
        }
        DynKind::Let(ds, body) => {
            for d in ds {
                match d {
                    DynDecl::Val { rhs, .. } => walk_dyn(rhs, f),
                    DynDecl::PrVal { rhs, .. } => walk_proof(rhs, false, f),
                    DynDecl::Fun(_) => {}
                }
            }
            walk_dyn(body, f);
        }
        DynKind::Lam { body, .. }
        | DynKind::Fix { body, .. }
        | DynKind::Ann(body, _)
        | DynKind::Frame { body, .. }
        | DynKind::Release { body, .. } => walk_dyn(body, f),
        _ => {}
    }
}

/// The state type a runtime term claims: its location proofs, read
/// syntactically.
pub fn state_type(t: &DynTerm) -> StateType {
    let mut mu = StateType::new();
    walk_dyn(t, &mut |l, ty, _| mu.entry(l).or_default().push(ty.clone()));
    mu
}

/// Location proofs that sit under a `viewbox`.
pub fn boxed_state_type(t: &DynTerm) -> StateType {
    let mut mu = StateType::new();
    walk_dyn(t, &mut |l, ty, boxed| {
        if boxed {
            mu.entry(l).or_default().push(ty.clone())
        }
    });
    mu
}

/// Is `t` a type without views, so that its values own no locations?
pub fn is_pure_type(t: &S) -> bool {
    match t {
        S::IntTy | S::BoolTy | S::IntOf(_) | S::BoolOf(_) | S::Ptr(_) | S::Unit | S::Top => true,
        S::Prod(ts) => ts.iter().all(is_pure_type),
        S::Tuple { views, items } => {
            views.as_ref().is_none_or(|v| v.is_empty()) && items.iter().all(is_pure_type)
        }
        S::Arrow(..) => true,
        S::Guard(_, x) | S::Assert(_, x) | S::Forall(_, _, x) | S::Exists(_, _, x) => {
            is_pure_type(x)
        }
        _ => false,
    }
}

/// Checks `v : t` under empty contexts and returns the locations the
/// derivation consumed.
pub fn value_locations(env: &Env, v: &DynTerm, t: &S) -> Option<Vec<u64>> {
    Checker::new(env).check_runtime(v, t).ok()
}

/// `dom(ST) = dom(μ)` and every cell checks at each type `μ` gives it.
pub fn store_typing_check(env: &Env, store: &Store, mu: &StateType) -> bool {
    store.domain() == mu.keys().copied().collect::<Vec<_>>()
        && mu.iter().all(|(l, ts)| {
            let v = store.read(*l).expect("domains agree");
            ts.iter().all(|t| Checker::new(env).value_has_type(v, t))
        })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EntailError {
    #[error("store entailment does not support `{0}`")]
    Unsupported(String),
}

fn eval_index(t: &S) -> Option<i64> {
    match t {
        S::Int(i) => Some(*i),
        S::Addr(a) => i64::try_from(*a).ok(),
        S::Neg(a) => eval_index(a)?.checked_neg(),
        S::IntOp(op, a, b) => {
            let (x, y) = (eval_index(a)?, eval_index(b)?);
            match op {
                IntOp::Add => x.checked_add(y),
                IntOp::Sub => x.checked_sub(y),
                IntOp::Mul => x.checked_mul(y),
                IntOp::Div => (y != 0).then(|| x.div_euclid(y)),
            }
        }
        _ => None,
    }
}

struct Entail<'a> {
    env: &'a Env,
    store: &'a Store,
    addrs: Vec<u64>,
    bound: i64,
}

impl Entail<'_> {
    /// Every way of satisfying `v` from `avail`, as the leftover cells.
    fn consume(
        &self,
        v: &S,
        avail: &BTreeSet<u64>,
        depth: usize,
    ) -> Result<Vec<BTreeSet<u64>>, EntailError> {
        if depth > self.store.len() * 2 + 4 {
            return Ok(vec![]);
        }
        match v {
            S::Emp => Ok(vec![avail.clone()]),
            S::At(t, l) => {
                let Some(l) = eval_index(l).and_then(|l| u64::try_from(l).ok()) else {
                    return Ok(vec![]);
                };
                let ok = avail.contains(&l)
                    && self
                        .store
                        .read(l)
                        .is_some_and(|x| Checker::new(self.env).value_has_type(x, t));
                Ok(if ok {
                    let mut rest = avail.clone();
                    rest.remove(&l);
                    vec![rest]
                } else {
                    vec![]
                })
            }
            S::Tensor(vs) => {
                let mut states = vec![avail.clone()];
                for w in vs {
                    let mut next = Vec::new();
                    for s in &states {
                        for r in self.consume(w, s, depth)? {
                            if !next.contains(&r) {
                                next.push(r);
                            }
                        }
                    }
                    states = next;
                }
                Ok(states)
            }
            S::Tuple { views, .. } => {
                self.consume(&S::Tensor(views.clone().unwrap_or_default()), avail, depth)
            }
            S::Assert(b, x) => match decide(b) {
                Some(true) => self.consume(x, avail, depth),
                _ => Ok(vec![]),
            },
            S::Guard(b, x) => match decide(b) {
                Some(true) => self.consume(x, avail, depth),
                Some(false) => Ok(vec![avail.clone()]),
                None => Ok(vec![]),
            },
            S::Exists(n, sort, x) => {
                let mut out = Vec::new();
                for c in self.candidates(*sort)? {
                    for r in self.consume(&x.subst(&[(n.clone(), c)]), avail, depth + 1)? {
                        if !out.contains(&r) {
                            out.push(r);
                        }
                    }
                }
                Ok(out)
            }
            S::App(name, args) => {
                if let Some(body) = self.env.expand_abbrev(name, args) {
                    return self.consume(&body, avail, depth + 1);
                }
                let Some(dv) = self.env.dataviews.get(name) else {
                    return Err(EntailError::Unsupported(v.to_string()));
                };
                let mut out = Vec::new();
                for c in &dv.constructors {
                    for body in self.unfold(c, args)? {
                        for r in self.consume(&body, avail, depth + 1)? {
                            if !out.contains(&r) {
                                out.push(r);
                            }
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(EntailError::Unsupported(v.to_string())),
        }
    }

    fn candidates(&self, sort: Sort) -> Result<Vec<S>, EntailError> {
        Ok(match sort {
            Sort::Int => (-self.bound..=self.bound).map(S::Int).collect(),
            Sort::Addr => self.addrs.iter().map(|a| S::Addr(*a)).collect(),
            Sort::Bool => vec![S::Bool(false), S::Bool(true)],
            s => {
                return Err(EntailError::Unsupported(format!(
                    "a witness of sort {}",
                    s.keyword()
                )))
            }
        })
    }

    /// The argument views of constructor `c` at every witness that makes
    /// its result `head(args)` and its guards hold.
    fn unfold(&self, c: &str, args: &[S]) -> Result<Vec<S>, EntailError> {
        let Some(sig) = self.env.cons.get(c) else {
            return Ok(vec![]);
        };
        let idx = sig.indices();
        if idx.len() != args.len() {
            return Ok(vec![]);
        }
        let mut fixed: Vec<(Name, S)> = Vec::new();
        for (i, a) in idx.iter().zip(args) {
            if let S::Var(x) = i {
                if sig.binders.iter().any(|(b, _)| b == x) && !fixed.iter().any(|(n, _)| n == x) {
                    fixed.push((x.clone(), a.clone()));
                }
            }
        }
        let open: Vec<&(Name, Sort)> = sig
            .binders
            .iter()
            .filter(|(b, _)| !fixed.iter().any(|(n, _)| n == b))
            .collect();
        let mut subs = vec![fixed];
        for (b, sort) in open {
            let cs = self.candidates(*sort)?;
            subs = subs
                .into_iter()
                .flat_map(|s| {
                    cs.iter().map(move |c| {
                        let mut s = s.clone();
                        s.push((b.clone(), c.clone()));
                        s
                    })
                })
                .collect();
        }
        let mut out = Vec::new();
        for sub in subs {
            let holds = |p: &S| decide(&p.subst(&sub)) == Some(true);
            let fits = idx.iter().zip(args).all(|(i, a)| match i {
                S::Var(x) if sub.iter().any(|(n, v)| n == x && v == a) => true,
                _ if a.is_ground_index() || eval_index(a).is_some() => {
                    holds(&S::cmp(CmpOp::Eq, i.clone(), a.clone()))
                }
                _ => i.subst(&sub) == *a,
            });
            if fits && sig.guards.iter().all(holds) {
                out.push(S::tensor(sig.args.iter().map(|a| a.subst(&sub)).collect()));
            }
        }
        Ok(out)
    }
}

/// `ST ⊨ V`: the cells of `store` are exactly what `v` describes.
pub fn entails_view(env: &Env, store: &Store, v: &S) -> Result<bool, EntailError> {
    let mut addrs: BTreeSet<u64> = store.domain().into_iter().collect();
    addrs.insert(0);
    for (_, x) in store.iter() {
        if let DynKind::Loc(l) = x.kind {
            addrs.insert(l);
        }
    }
    let e = Entail {
        env,
        store,
        addrs: addrs.into_iter().collect(),
        bound: store.len() as i64 + 1,
    };
    let all: BTreeSet<u64> = store.domain().into_iter().collect();
    Ok(e.consume(v, &all, 0)?.iter().any(|r| r.is_empty()))
}

/// What happened when a program ran under the metatheory oracles.
#[derive(Clone, Debug)]
pub struct MetaReport {
    pub steps: u64,
    pub outcome: Outcome,
    pub erased_outcome: Outcome,
    /// Subject-reduction or store-typing failures, one line each.
    pub violations: Vec<String>,
    /// Closed values at pure types that still claimed locations.
    pub purity_violations: Vec<String>,
    /// Do the erased and instrumented runs end in the same value and store?
    pub agree: bool,
}

impl MetaReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
            && self.purity_violations.is_empty()
            && self.agree
            && matches!(self.outcome, Outcome::Value(_))
    }
}

fn erase_store(s: &Store) -> Vec<(u64, String)> {
    s.iter().map(|(l, v)| (l, erase(v).to_string())).collect()
}

/// Findings of the oracles on one machine state.
#[derive(Clone, Debug, Default)]
pub struct Verdict {
    /// Subject-reduction and store-typing failures.
    pub violations: Vec<String>,
    /// Closed values at pure types that claim locations.
    pub purity: Vec<String>,
}

impl Verdict {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.purity.is_empty()
    }
}

/// Re-checks machine states against the type of the program they started
/// from. Locations that were ever boxed stay in the state type for good.
pub struct StateOracle<'a> {
    env: &'a Env,
    main_type: S,
    persistent: StateType,
}

impl<'a> StateOracle<'a> {
    pub fn new(env: &'a Env, main_type: &S) -> Self {
        StateOracle {
            env,
            main_type: main_type.clone(),
            persistent: StateType::new(),
        }
    }

    pub fn check(&mut self, m: &Machine) -> Verdict {
        let mut out = Verdict::default();
        for (l, ts) in boxed_state_type(&m.term) {
            let e = self.persistent.entry(l).or_default();
            for t in ts {
                if !e.contains(&t) {
                    e.push(t);
                }
            }
        }
        let mut mu = state_type(&m.term);
        for (l, ts) in &self.persistent {
            mu.entry(*l).or_default().extend(ts.iter().cloned());
        }
        if let Err(d) = Checker::new(self.env).check_runtime(&m.term, &self.main_type) {
            out.violations
                .push(format!("term no longer checks: {}", d.message));
        }
        if !store_typing_check(self.env, &m.store, &mu) {
            out.violations
                .push("store does not match its state type".into());
        }
        for (l, ts) in &mu {
            let Some(v) = m.store.read(*l) else { continue };
            for t in ts.iter().filter(|t| is_pure_type(t)) {
                if let Some(locs) = value_locations(self.env, v, t) {
                    if !locs.is_empty() {
                        out.purity
                            .push(format!("cell l_{} at `{}` claims {:?}", l, t, locs));
                    }
                }
            }
        }
        if m.term.is_value() && is_pure_type(&self.main_type) {
            if let Some(locs) = value_locations(self.env, &m.term, &self.main_type) {
                if !locs.is_empty() {
                    out.purity
                        .push(format!("value `{}` claims {:?}", m.term, locs));
                }
            }
        }
        out
    }
}

/// Runs `main` in instrumented mode, consulting the oracles every `every`
/// steps, then runs its erasure and compares the two.
pub fn check_metatheory(
    env: &Env,
    funs: &[Rc<FunDef>],
    erased_funs: &[Rc<FunDef>],
    main: &DynTerm,
    main_type: &S,
    fuel: u64,
    every: u64,
) -> MetaReport {
    let mut violations = Vec::new();
    let mut purity = Vec::new();
    let every = every.max(1);
    let mut oracle = StateOracle::new(env, main_type);
    let mut record = |m: &Machine, what: &str| {
        let v = oracle.check(m);
        violations.extend(v.violations.into_iter().map(|x| format!("{what}: {x}")));
        purity.extend(v.purity.into_iter().map(|x| format!("{what}: {x}")));
    };
    let mut m = Machine::new(env, funs, Mode::Instrumented, main.clone());
    record(&m, "initial state");
    let outcome = m.run(fuel, &mut |m, info| {
        if m.steps % every == 0 || m.term.is_value() {
            record(m, &format!("step {} ({})", m.steps, info.rule));
        }
    });
    let mut e = Machine::new(env, erased_funs, Mode::Erased, erase(main));
    let erased_outcome = e.run(fuel, &mut |_, _| {});
    let agree = match (&outcome, &erased_outcome) {
        (Outcome::Value(a), Outcome::Value(b)) => {
            erase(a).to_string() == b.to_string() && erase_store(&m.store) == erase_store(&e.store)
        }
        _ => false,
    };
    MetaReport {
        steps: m.steps,
        outcome,
        erased_outcome,
        violations,
        purity_violations: purity,
        agree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Span;

    fn int(i: i64) -> DynTerm {
        DynTerm::new(DynKind::Int(i), Span::DUMMY)
    }

    #[test]
    fn store_typing_examples() {
        let env = Env::with_prelude();
        let mut st = Store::new();
        st.insert(1, int(5));
        let mu = |t: S| StateType::from([(1, vec![t])]);
        assert!(store_typing_check(&env, &st, &mu(S::IntTy)));
        assert!(!store_typing_check(&env, &st, &mu(S::BoolTy)));
        assert!(store_typing_check(&env, &Store::new(), &StateType::new()));
        assert!(!store_typing_check(&env, &Store::new(), &mu(S::IntTy)));
    }

    #[test]
    fn at_view_needs_exact_domain() {
        let env = Env::with_prelude();
        let mut st = Store::new();
        st.insert(1, int(5));
        let at = |l| S::at(S::IntTy, S::Addr(l));
        assert_eq!(entails_view(&env, &st, &at(1)), Ok(true));
        assert_eq!(entails_view(&env, &st, &at(2)), Ok(false));
        assert_eq!(entails_view(&env, &st, &S::Emp), Ok(false));
        assert_eq!(entails_view(&env, &Store::new(), &S::Emp), Ok(true));
    }

    #[test]
    fn lolli_is_unsupported() {
        let env = Env::with_prelude();
        let v = S::Lolli(Box::new(S::Emp), Box::new(S::Emp));
        assert!(entails_view(&env, &Store::new(), &v).is_err());
    }
}
