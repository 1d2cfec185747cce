//! Small-step evaluation, leftmost-innermost, over an explicit store.
//!
//! In instrumented mode proofs travel with values: at-view proofs are
//! minted as `Loc(l, T)` by `alloc` and `setPtr`, and every call to a
//! user function is unfolded under a `Frame` carrying its instantiated
//! result type, so that each intermediate term can be re-checked.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::check::{Checker, Instance};
use crate::decls::Env;
use crate::diag::Span;
use crate::statics::{entails, Name, SortCtx, StaticTerm as S};
use crate::syntax::ast::BinOp;
use crate::terms::{
    DynDecl, DynKind, DynPat, DynPatKind, DynTerm, FunBody, FunDef, ProofDecl, ProofKind, ProofPat,
    ProofPatKind, ProofTerm, Subst,
};

use super::store::Store;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Proofs and statics erased.
    Erased,
    /// Proofs carried as data; statics instantiated at each call.
    Instrumented,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StuckReason {
    #[error("read of unallocated location l_{0}")]
    DanglingRead(u64),
    #[error("write to unallocated location l_{0}")]
    DanglingWrite(u64),
    #[error("free of unallocated location l_{0}")]
    DanglingFree(u64),
    #[error("`{0}` has no definition")]
    Undefined(String),
    #[error("{0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("stuck at {}..{}: {reason}", span.start, span.end)]
pub struct Stuck {
    pub reason: StuckReason,
    pub span: Span,
}

/// One reduction: the rule that fired and the redex's span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepInfo {
    pub rule: &'static str,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Value(DynTerm),
    Stuck(Stuck),
    OutOfFuel,
}

type Red = Result<Option<(DynTerm, &'static str, Span)>, Stuck>;

fn stuck<T>(reason: StuckReason, span: Span) -> Result<T, Stuck> {
    Err(Stuck { reason, span })
}

fn malformed<T>(msg: impl Into<String>, span: Span) -> Result<T, Stuck> {
    stuck(StuckReason::Malformed(msg.into()), span)
}

fn ptr_of(v: &DynTerm) -> Option<u64> {
    match v.kind {
        DynKind::Null => Some(0),
        DynKind::Loc(l) => Some(l),
        _ => None,
    }
}

fn int_of(v: &DynTerm) -> Option<i64> {
    match v.kind {
        DynKind::Int(i) => Some(i),
        _ => None,
    }
}

fn bool_of(v: &DynTerm) -> Option<bool> {
    match v.kind {
        DynKind::Bool(b) => Some(b),
        _ => None,
    }
}

fn ptr_value(l: u64, span: Span) -> DynTerm {
    DynTerm::new(
        if l == 0 {
            DynKind::Null
        } else {
            DynKind::Loc(l)
        },
        span,
    )
}

/// Decides a closed static proposition.
pub fn decide(c: &S) -> Option<bool> {
    if !c.free_vars().is_empty() || c.has_metas() {
        return None;
    }
    let ctx = SortCtx::default();
    if entails(&ctx, &[], c) {
        Some(true)
    } else if entails(&ctx, &[], &S::not(c.clone())) {
        Some(false)
    } else {
        None
    }
}

/// Forgets singleton indices on integers and booleans.
fn widen(t: &S) -> S {
    match t {
        S::IntOf(_) => S::IntTy,
        S::BoolOf(_) => S::BoolTy,
        S::Prod(ts) => S::Prod(ts.iter().map(widen).collect()),
        _ => t.clone(),
    }
}

/// Widens the cell types of every location proof in `p`.
fn widen_proof(p: &ProofTerm) -> ProofTerm {
    let kind = match &p.kind {
        ProofKind::Loc(l, t) => ProofKind::Loc(*l, widen(t)),
        ProofKind::Tuple(xs) => ProofKind::Tuple(xs.iter().map(widen_proof).collect()),
        ProofKind::Con(c, xs) => ProofKind::Con(c.clone(), xs.iter().map(widen_proof).collect()),
        ProofKind::Call {
            func,
            statics,
            args,
        } => ProofKind::Call {
            func: func.clone(),
            statics: statics.clone(),
            args: args.iter().map(widen_proof).collect(),
        },
        k => k.clone(),
    };
    ProofTerm { kind, ..p.clone() }
}

/// Instantiates a call, widening the cell types in its proof arguments if
/// the exact ones admit no instance.
fn instantiate(
    env: &Env,
    sig: &crate::decls::FunSig,
    statics: Option<&[S]>,
    proofs: Vec<ProofTerm>,
    args: &[DynTerm],
    sp: Span,
) -> Result<(Instance, Vec<ProofTerm>), Stuck> {
    match Checker::new(env).instantiate_call(sig, statics, &proofs, args, sp) {
        Ok(i) => Ok((i, proofs)),
        Err(d) => {
            let wide: Vec<ProofTerm> = proofs.iter().map(widen_proof).collect();
            match Checker::new(env).instantiate_call(sig, statics, &wide, args, sp) {
                Ok(i) => Ok((i, wide)),
                Err(_) => malformed(
                    format!("cannot instantiate `{}`: {}", sig.name, d.message),
                    sp,
                ),
            }
        }
    }
}

fn unbox(p: ProofTerm) -> ProofTerm {
    match p.kind {
        ProofKind::Call { func, mut args, .. } if func == "viewbox" && args.len() == 1 => {
            args.remove(0)
        }
        kind => ProofTerm { kind, ..p },
    }
}

pub struct Machine<'a> {
    env: &'a Env,
    funs: BTreeMap<Name, Rc<FunDef>>,
    pub mode: Mode,
    pub store: Store,
    pub term: DynTerm,
    pub steps: u64,
}

impl<'a> Machine<'a> {
    pub fn new(env: &'a Env, funs: &[Rc<FunDef>], mode: Mode, term: DynTerm) -> Self {
        Machine {
            env,
            funs: funs
                .iter()
                .map(|f| (f.sig.name.clone(), f.clone()))
                .collect(),
            mode,
            store: Store::new(),
            term,
            steps: 0,
        }
    }

    fn instrumented(&self) -> bool {
        self.mode == Mode::Instrumented
    }

    /// Performs one reduction; `None` when the term is a value.
    pub fn step(&mut self) -> Result<Option<StepInfo>, Stuck> {
        let t = self.term.clone();
        match self.reduce(&t)? {
            None => Ok(None),
            Some((t2, rule, span)) => {
                self.term = t2;
                self.steps += 1;
                Ok(Some(StepInfo { rule, span }))
            }
        }
    }

    /// Runs for at most `fuel` steps, calling `observe` after each one.
    pub fn run(&mut self, fuel: u64, observe: &mut dyn FnMut(&Machine, &StepInfo)) -> Outcome {
        loop {
            if self.term.is_value() {
                return Outcome::Value(self.term.clone());
            }
            if self.steps >= fuel {
                return Outcome::OutOfFuel;
            }
            match self.step() {
                Ok(Some(info)) => observe(self, &info),
                Ok(None) => return Outcome::Value(self.term.clone()),
                Err(s) => return Outcome::Stuck(s),
            }
        }
    }

    /// Reduces the first non-value of `xs`, if any.
    fn reduce_first(
        &mut self,
        xs: &[DynTerm],
    ) -> Result<Option<(Vec<DynTerm>, &'static str, Span)>, Stuck> {
        for (i, x) in xs.iter().enumerate() {
            if !x.is_value() {
                return Ok(self.reduce(x)?.map(|(y, r, s)| {
                    let mut v = xs.to_vec();
                    v[i] = y;
                    (v, r, s)
                }));
            }
        }
        Ok(None)
    }

    fn eval_first_proof(
        &mut self,
        ps: &[ProofTerm],
    ) -> Result<Option<(Vec<ProofTerm>, Span)>, Stuck> {
        for (i, p) in ps.iter().enumerate() {
            if !p.is_value() {
                let v = self.eval_proof(p, &mut Vec::new(), 0)?;
                let mut out = ps.to_vec();
                out[i] = v;
                return Ok(Some((out, p.span)));
            }
        }
        Ok(None)
    }

    fn reduce(&mut self, t: &DynTerm) -> Red {
        if t.is_value() {
            return Ok(None);
        }
        let sp = t.span;
        let mk = |kind| DynTerm::new(kind, sp);
        match &t.kind {
            DynKind::Var(x) => malformed(format!("free variable `{}`", x), sp),
            DynKind::Tuple { proofs, items } => {
                if let Some(ps) = proofs {
                    if let Some((ps2, psp)) = self.eval_first_proof(ps)? {
                        return Ok(Some((
                            mk(DynKind::Tuple {
                                proofs: Some(ps2),
                                items: items.clone(),
                            }),
                            "proof",
                            psp,
                        )));
                    }
                }
                Ok(self.reduce_first(items)?.map(|(xs, r, s)| {
                    (
                        mk(DynKind::Tuple {
                            proofs: proofs.clone(),
                            items: xs,
                        }),
                        r,
                        s,
                    )
                }))
            }
            DynKind::Call {
                func,
                statics,
                inv,
                proofs,
                args,
                infix,
            } => {
                let rebuild = |inv: Vec<ProofTerm>, proofs: Vec<ProofTerm>, args: Vec<DynTerm>| {
                    mk(DynKind::Call {
                        func: func.clone(),
                        statics: statics.clone(),
                        inv,
                        proofs,
                        args,
                        infix: *infix,
                    })
                };
                if let Some((i2, psp)) = self.eval_first_proof(inv)? {
                    return Ok(Some((
                        rebuild(i2, proofs.clone(), args.clone()),
                        "proof",
                        psp,
                    )));
                }
                if let Some((p2, psp)) = self.eval_first_proof(proofs)? {
                    return Ok(Some((rebuild(inv.clone(), p2, args.clone()), "proof", psp)));
                }
                if let Some((a2, r, s)) = self.reduce_first(args)? {
                    return Ok(Some((rebuild(inv.clone(), proofs.clone(), a2), r, s)));
                }
                let mut all = inv.clone();
                all.extend(proofs.iter().cloned());
                self.call(func, statics.as_deref(), all, args.clone(), sp)
                    .map(Some)
            }
            DynKind::App { func, proofs, args } => {
                if let Some((f2, r, s)) = self.reduce(func)? {
                    return Ok(Some((
                        mk(DynKind::App {
                            func: Box::new(f2),
                            proofs: proofs.clone(),
                            args: args.clone(),
                        }),
                        r,
                        s,
                    )));
                }
                if let Some((p2, psp)) = self.eval_first_proof(proofs)? {
                    return Ok(Some((
                        mk(DynKind::App {
                            func: func.clone(),
                            proofs: p2,
                            args: args.clone(),
                        }),
                        "proof",
                        psp,
                    )));
                }
                if let Some((a2, r, s)) = self.reduce_first(args)? {
                    return Ok(Some((
                        mk(DynKind::App {
                            func: func.clone(),
                            proofs: proofs.clone(),
                            args: a2,
                        }),
                        r,
                        s,
                    )));
                }
                self.apply(func, proofs.clone(), args.clone(), sp).map(Some)
            }
            DynKind::BinOp(op, a, b) => {
                if let Some((a2, r, s)) = self.reduce(a)? {
                    return Ok(Some((
                        mk(DynKind::BinOp(*op, Box::new(a2), b.clone())),
                        r,
                        s,
                    )));
                }
                if let Some((b2, r, s)) = self.reduce(b)? {
                    return Ok(Some((
                        mk(DynKind::BinOp(*op, a.clone(), Box::new(b2))),
                        r,
                        s,
                    )));
                }
                Ok(Some((binop(*op, a, b, sp)?, "op", sp)))
            }
            DynKind::If(c, a, b) => {
                if let Some((c2, r, s)) = self.reduce(c)? {
                    return Ok(Some((
                        mk(DynKind::If(Box::new(c2), a.clone(), b.clone())),
                        r,
                        s,
                    )));
                }
                match bool_of(c) {
                    Some(true) => Ok(Some(((**a).clone(), "if", sp))),
                    Some(false) => Ok(Some(((**b).clone(), "if", sp))),
                    None => malformed("`if` on a non-boolean", sp),
                }
            }
            DynKind::Sif(c, a, b) => match decide(c) {
                Some(true) => Ok(Some(((**a).clone(), "sif", sp))),
                Some(false) => Ok(Some(((**b).clone(), "sif", sp))),
                None => malformed(format!("`sif` condition `{}` is not closed", c), sp),
            },
            DynKind::Let(ds, body) => self.reduce_let(ds, body, sp),
            DynKind::Ann(x, ty) => match self.reduce(x)? {
                Some((x2, r, s)) => Ok(Some((mk(DynKind::Ann(Box::new(x2), ty.clone())), r, s))),
                None => Ok(Some(((**x).clone(), "ann", sp))),
            },
            DynKind::Frame { ret, body } => match self.reduce(body)? {
                Some((b2, r, s)) => Ok(Some((
                    mk(DynKind::Frame {
                        ret: ret.clone(),
                        body: Box::new(b2),
                    }),
                    r,
                    s,
                ))),
                None => Ok(Some(((**body).clone(), "return", sp))),
            },
            DynKind::Release { drop, body } => match self.reduce(body)? {
                Some((b2, r, s)) => Ok(Some((
                    mk(DynKind::Release {
                        drop: drop.clone(),
                        body: Box::new(b2),
                    }),
                    r,
                    s,
                ))),
                None => Ok(Some((release(drop, body), "release", sp))),
            },
            _ => Ok(None),
        }
    }

    fn reduce_let(&mut self, ds: &[DynDecl], body: &DynTerm, sp: Span) -> Red {
        let mk_let = |ds: Vec<DynDecl>| {
            if ds.is_empty() {
                body.clone()
            } else {
                DynTerm::new(DynKind::Let(ds, Box::new(body.clone())), sp)
            }
        };
        let Some(first) = ds.first() else {
            return Ok(Some((body.clone(), "let", sp)));
        };
        let rest = mk_let(ds[1..].to_vec());
        match first {
            DynDecl::Val { pat, rhs, span } => {
                if let Some((r2, r, s)) = self.reduce(rhs)? {
                    let mut ds2 = ds.to_vec();
                    ds2[0] = DynDecl::Val {
                        pat: pat.clone(),
                        rhs: r2,
                        span: *span,
                    };
                    return Ok(Some((mk_let(ds2), r, s)));
                }
                let mut sub = Subst::default();
                match_dyn(pat, rhs, &mut sub)?;
                Ok(Some((sub.dyn_term(&rest), "let", *span)))
            }
            DynDecl::PrVal { pat, rhs, span } => {
                if !rhs.is_value() {
                    let v = self.eval_proof(rhs, &mut Vec::new(), 0)?;
                    let mut ds2 = ds.to_vec();
                    ds2[0] = DynDecl::PrVal {
                        pat: pat.clone(),
                        rhs: v,
                        span: *span,
                    };
                    return Ok(Some((mk_let(ds2), "proof", rhs.span)));
                }
                let mut sub = Subst::default();
                match_proof(pat, rhs, false, &mut sub)?;
                Ok(Some((sub.dyn_term(&rest), "prval", *span)))
            }
            DynDecl::Fun(f) => {
                let sub = Subst {
                    dyns: vec![(
                        f.sig.name.clone(),
                        DynTerm::new(DynKind::Closure(f.clone()), f.span),
                    )],
                    ..Default::default()
                };
                Ok(Some((sub.dyn_term(&rest), "fun", f.span)))
            }
        }
    }

    fn apply(
        &mut self,
        func: &DynTerm,
        proofs: Vec<ProofTerm>,
        args: Vec<DynTerm>,
        sp: Span,
    ) -> Result<(DynTerm, &'static str, Span), Stuck> {
        match &func.kind {
            DynKind::FunRef(n) => self.call(n, None, proofs, args, sp),
            DynKind::Closure(def) => self.unfold(def, None, proofs, args, true, sp),
            DynKind::Lam {
                proofs: pps,
                params,
                body,
                ..
            } => {
                if params.len() != args.len() || (self.instrumented() && pps.len() != proofs.len())
                {
                    return malformed(
                        "function literal applied to the wrong number of arguments",
                        sp,
                    );
                }
                let sub = Subst {
                    dyns: params.iter().map(|p| p.name.clone()).zip(args).collect(),
                    proofs: pps.iter().map(|p| p.name.clone()).zip(proofs).collect(),
                    statics: vec![],
                };
                Ok((sub.dyn_term(body), "beta", sp))
            }
            DynKind::Fix {
                name, params, body, ..
            } => {
                if params.len() != args.len() {
                    return malformed(
                        format!("`{}` applied to the wrong number of arguments", name),
                        sp,
                    );
                }
                let mut dyns = vec![(name.clone(), func.clone())];
                dyns.extend(params.iter().map(|p| p.name.clone()).zip(args));
                let sub = Subst {
                    dyns,
                    ..Default::default()
                };
                Ok((sub.dyn_term(body), "fix", sp))
            }
            _ => malformed(format!("`{}` is not a function", func), sp),
        }
    }

    fn call(
        &mut self,
        func: &str,
        statics: Option<&[S]>,
        proofs: Vec<ProofTerm>,
        args: Vec<DynTerm>,
        sp: Span,
    ) -> Result<(DynTerm, &'static str, Span), Stuck> {
        if Env::is_builtin(func)
            && !self
                .funs
                .get(func)
                .is_some_and(|f| matches!(f.body, FunBody::Dyn(_)))
        {
            return self
                .builtin(func, statics, proofs, args, sp)
                .map(|t| (t, "builtin", sp));
        }
        let Some(def) = self.funs.get(func).cloned() else {
            return stuck(StuckReason::Undefined(func.to_string()), sp);
        };
        self.unfold(&def, statics, proofs, args, false, sp)
    }

    fn unfold(
        &mut self,
        def: &Rc<FunDef>,
        statics: Option<&[S]>,
        proofs: Vec<ProofTerm>,
        args: Vec<DynTerm>,
        closure: bool,
        sp: Span,
    ) -> Result<(DynTerm, &'static str, Span), Stuck> {
        let sig = &def.sig;
        let FunBody::Dyn(body) = &def.body else {
            return stuck(StuckReason::Undefined(sig.name.clone()), sp);
        };
        if args.len() != sig.args.len() {
            return malformed(
                format!("`{}` applied to the wrong number of arguments", sig.name),
                sp,
            );
        }
        let mut sub = Subst::default();
        if closure {
            sub.dyns.push((
                sig.name.clone(),
                DynTerm::new(DynKind::Closure(def.clone()), def.span),
            ));
        }
        sub.dyns.extend(
            sig.args
                .iter()
                .map(|p| p.name.clone())
                .zip(args.iter().cloned()),
        );
        if !self.instrumented() {
            return Ok((sub.dyn_term(body), "call", sp));
        }
        let params: Vec<&Name> = sig.inv.iter().chain(&sig.proofs).map(|p| &p.name).collect();
        if params.len() != proofs.len() {
            return malformed(
                format!("`{}` applied to the wrong number of proofs", sig.name),
                sp,
            );
        }
        let (inst, proofs) = instantiate(self.env, sig, statics, proofs, &args, sp)?;
        for (i, (n, p)) in params.into_iter().zip(proofs).enumerate() {
            let p = if inst.dropped.get(i) == Some(&true) {
                unbox(p)
            } else {
                p
            };
            sub.proofs.push((n.clone(), p));
        }
        sub.statics = inst.statics.clone();
        let ret = sig.full_ret().subst(&inst.statics);
        let frame = DynTerm::new(
            DynKind::Frame {
                ret,
                body: Box::new(sub.dyn_term(body)),
            },
            sp,
        );
        if inst.dropped.iter().any(|d| *d) {
            let wrapped = DynTerm::new(
                DynKind::Release {
                    drop: inst.dropped,
                    body: Box::new(frame),
                },
                sp,
            );
            return Ok((wrapped, "call", sp));
        }
        Ok((frame, "call", sp))
    }

    /// Pairs a result with its proofs in instrumented mode.
    fn with_proofs(&self, proofs: Vec<ProofTerm>, v: DynTerm, sp: Span) -> DynTerm {
        if self.instrumented() {
            DynTerm::new(
                DynKind::Tuple {
                    proofs: Some(proofs),
                    items: vec![v],
                },
                sp,
            )
        } else {
            v
        }
    }

    fn array_proof(&self, base: u64, n: u64, sp: Span) -> Result<ProofTerm, Stuck> {
        let Some(dv) = self.env.dataviews.get("arrayView") else {
            return malformed("`arrayView` is not declared", sp);
        };
        let by_arity = |k: usize| {
            dv.constructors
                .iter()
                .find(|c| self.env.cons.get(*c).is_some_and(|s| s.args.len() == k))
                .cloned()
        };
        let (Some(none), Some(some)) = (by_arity(0), by_arity(2)) else {
            return malformed("`arrayView` has an unexpected shape", sp);
        };
        let mut p = ProofTerm::new(ProofKind::Con(none, vec![]), sp);
        for i in (0..n).rev() {
            let cell = ProofTerm::new(ProofKind::Loc(base + i, S::Unit), sp);
            p = ProofTerm::new(ProofKind::Con(some.clone(), vec![cell, p]), sp);
        }
        Ok(p)
    }

    fn builtin(
        &mut self,
        func: &str,
        statics: Option<&[S]>,
        mut proofs: Vec<ProofTerm>,
        args: Vec<DynTerm>,
        sp: Span,
    ) -> Result<DynTerm, Stuck> {
        let bad = || malformed(format!("bad arguments to `{}`", func), sp);
        let int2 = |f: fn(i64, i64) -> bool| -> Result<DynTerm, Stuck> {
            match (args.first().and_then(int_of), args.get(1).and_then(int_of)) {
                (Some(a), Some(b)) => Ok(DynTerm::new(DynKind::Bool(f(a, b)), sp)),
                _ => malformed(format!("bad arguments to `{}`", func), sp),
            }
        };
        match func {
            "igt" => int2(|a, b| a > b),
            "ige" => int2(|a, b| a >= b),
            "ilt" => int2(|a, b| a < b),
            "ile" => int2(|a, b| a <= b),
            "ieq" => int2(|a, b| a == b),
            "ineq" => int2(|a, b| a != b),
            "ipred" | "isucc" => {
                let Some(i) = args.first().and_then(int_of) else {
                    return bad();
                };
                let d = if func == "ipred" { -1 } else { 1 };
                match i.checked_add(d) {
                    Some(j) => Ok(DynTerm::new(DynKind::Int(j), sp)),
                    None => malformed("integer overflow", sp),
                }
            }
            "isNull" => {
                let Some(l) = args.first().and_then(ptr_of) else {
                    return bad();
                };
                Ok(DynTerm::new(DynKind::Bool(l == 0), sp))
            }
            "getPtr" => {
                let Some(l) = args.first().and_then(ptr_of) else {
                    return bad();
                };
                let Some(v) = self.store.read(l).cloned() else {
                    return stuck(StuckReason::DanglingRead(l), sp);
                };
                Ok(self.with_proofs(proofs, v, sp))
            }
            "setPtr" => {
                let (Some(l), Some(v)) = (args.first().and_then(ptr_of), args.get(1)) else {
                    return bad();
                };
                if !self.store.write(l, v.clone()) {
                    return stuck(StuckReason::DanglingWrite(l), sp);
                }
                if self.instrumented() {
                    let ty = match statics.and_then(|s| s.first()) {
                        Some(t) if t.free_vars().is_empty() && !t.has_metas() => t.clone(),
                        _ => Checker::new(self.env).value_type(v).or_else(|d| {
                            malformed(format!("untypable value `{}`: {}", v, d.message), sp)
                        })?,
                    };
                    proofs = vec![ProofTerm::new(ProofKind::Loc(l, ty), sp)];
                }
                Ok(self.with_proofs(proofs, DynTerm::unit(sp), sp))
            }
            "alloc" => {
                let Some(n) = args.first().and_then(int_of).filter(|n| *n >= 0) else {
                    return bad();
                };
                let base = self.store.alloc(n as u64);
                let pf = if self.instrumented() {
                    vec![self.array_proof(base, n as u64, sp)?]
                } else {
                    vec![]
                };
                Ok(self.with_proofs(pf, ptr_value(base, sp), sp))
            }
            "free" => {
                let (Some(l), Some(n)) =
                    (args.first().and_then(ptr_of), args.get(1).and_then(int_of))
                else {
                    return bad();
                };
                if n < 0 {
                    return bad();
                }
                if let Err(bad_l) = self.store.free(l, n as u64) {
                    return stuck(StuckReason::DanglingFree(bad_l), sp);
                }
                Ok(DynTerm::unit(sp))
            }
            _ => stuck(StuckReason::Undefined(func.to_string()), sp),
        }
    }

    /// Evaluates a proof to a proof value. Proofs are total, so this is
    /// done in one go.
    fn eval_proof(
        &mut self,
        p: &ProofTerm,
        locals: &mut Vec<Rc<FunDef>>,
        depth: usize,
    ) -> Result<ProofTerm, Stuck> {
        if p.is_value() {
            return Ok(p.clone());
        }
        if depth > 100_000 {
            return malformed("proof evaluation does not terminate", p.span);
        }
        let sp = p.span;
        let mk = |kind| ProofTerm::new(kind, sp);
        match &p.kind {
            ProofKind::Var(x) => malformed(format!("free proof variable `{}`", x), sp),
            ProofKind::Tuple(xs) => {
                let vs = xs
                    .iter()
                    .map(|x| self.eval_proof(x, locals, depth + 1))
                    .collect::<Result<_, _>>()?;
                Ok(mk(ProofKind::Tuple(vs)))
            }
            ProofKind::Con(c, xs) => {
                let vs = xs
                    .iter()
                    .map(|x| self.eval_proof(x, locals, depth + 1))
                    .collect::<Result<_, _>>()?;
                Ok(mk(ProofKind::Con(c.clone(), vs)))
            }
            ProofKind::Call {
                func,
                statics,
                args,
            } => {
                let vs: Vec<ProofTerm> = args
                    .iter()
                    .map(|x| self.eval_proof(x, locals, depth + 1))
                    .collect::<Result<_, _>>()?;
                if func == "viewbox" {
                    return Ok(mk(ProofKind::Call {
                        func: func.clone(),
                        statics: statics.clone(),
                        args: vs,
                    }));
                }
                let def = locals
                    .iter()
                    .rev()
                    .find(|f| &f.sig.name == func)
                    .or_else(|| self.funs.get(func))
                    .cloned();
                let Some(def) = def else {
                    return stuck(StuckReason::Undefined(func.clone()), sp);
                };
                let FunBody::Proof(body) = &def.body else {
                    return stuck(StuckReason::Undefined(func.clone()), sp);
                };
                let (inst, vs) = instantiate(self.env, &def.sig, statics.as_deref(), vs, &[], sp)?;
                let sub = Subst {
                    proofs: def
                        .sig
                        .proofs
                        .iter()
                        .map(|q| q.name.clone())
                        .zip(vs)
                        .collect(),
                    statics: inst.statics,
                    dyns: vec![],
                };
                let b = sub.proof(body);
                self.eval_proof(&b, locals, depth + 1)
            }
            ProofKind::App(f, a) => {
                let fv = self.eval_proof(f, locals, depth + 1)?;
                let av = self.eval_proof(a, locals, depth + 1)?;
                match &fv.kind {
                    ProofKind::Lam { param, body, .. } => {
                        let sub = Subst {
                            proofs: vec![(param.clone(), av)],
                            ..Default::default()
                        };
                        self.eval_proof(&sub.proof(body), locals, depth + 1)
                    }
                    _ => malformed("proof application of a non-function", sp),
                }
            }
            ProofKind::Let(ds, body) => {
                let Some(first) = ds.first() else {
                    return self.eval_proof(body, locals, depth + 1);
                };
                let rest = mk(ProofKind::Let(ds[1..].to_vec(), body.clone()));
                match first {
                    ProofDecl::Val { pat, rhs, .. } => {
                        let v = self.eval_proof(rhs, locals, depth + 1)?;
                        let mut sub = Subst::default();
                        match_proof(pat, &v, false, &mut sub)?;
                        self.eval_proof(&sub.proof(&rest), locals, depth + 1)
                    }
                    ProofDecl::Fun(f) => {
                        locals.push(f.clone());
                        let r = self.eval_proof(&rest, locals, depth + 1);
                        locals.pop();
                        r
                    }
                }
            }
            ProofKind::Sif(c, a, b) => match decide(c) {
                Some(true) => self.eval_proof(a, locals, depth + 1),
                Some(false) => self.eval_proof(b, locals, depth + 1),
                None => malformed(format!("`sif` condition `{}` is not closed", c), sp),
            },
            ProofKind::Ann(x, _) => self.eval_proof(x, locals, depth + 1),
            ProofKind::Loc(..) | ProofKind::Lam { .. } => Ok(p.clone()),
        }
    }
}

fn binop(op: BinOp, a: &DynTerm, b: &DynTerm, sp: Span) -> Result<DynTerm, Stuck> {
    let v = |k| Ok(DynTerm::new(k, sp));
    let overflow = || malformed("integer overflow", sp);
    match (op, &a.kind, &b.kind) {
        (BinOp::Add, DynKind::Int(x), DynKind::Int(y)) => x
            .checked_add(*y)
            .map_or_else(overflow, |z| v(DynKind::Int(z))),
        (BinOp::Sub, DynKind::Int(x), DynKind::Int(y)) => x
            .checked_sub(*y)
            .map_or_else(overflow, |z| v(DynKind::Int(z))),
        (BinOp::Mul, DynKind::Int(x), DynKind::Int(y)) => x
            .checked_mul(*y)
            .map_or_else(overflow, |z| v(DynKind::Int(z))),
        (BinOp::Add | BinOp::Sub, _, DynKind::Int(y)) if ptr_of(a).is_some() => {
            let l = ptr_of(a).unwrap_or(0) as i128;
            let r = if op == BinOp::Add {
                l + *y as i128
            } else {
                l - *y as i128
            };
            if r < 0 {
                return malformed("pointer arithmetic below null", sp);
            }
            Ok(ptr_value(r as u64, sp))
        }
        (BinOp::And, DynKind::Bool(x), DynKind::Bool(y)) => v(DynKind::Bool(*x && *y)),
        (BinOp::Or, DynKind::Bool(x), DynKind::Bool(y)) => v(DynKind::Bool(*x || *y)),
        (BinOp::Eq | BinOp::Ne, _, _) => {
            let eq = match (ptr_of(a), ptr_of(b)) {
                (Some(x), Some(y)) => x == y,
                _ => match (&a.kind, &b.kind) {
                    (DynKind::Int(x), DynKind::Int(y)) => x == y,
                    (DynKind::Bool(x), DynKind::Bool(y)) => x == y,
                    _ => return malformed("incomparable operands", sp),
                },
            };
            v(DynKind::Bool(eq == (op == BinOp::Eq)))
        }
        (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge, DynKind::Int(x), DynKind::Int(y)) => {
            let r = match op {
                BinOp::Lt => x < y,
                BinOp::Le => x <= y,
                BinOp::Gt => x > y,
                _ => x >= y,
            };
            v(DynKind::Bool(r))
        }
        _ => malformed(
            format!("operator `{}` on `{}` and `{}`", op.symbol(), a, b),
            sp,
        ),
    }
}

/// Removes the released proof components from a value.
fn release(drop: &[bool], v: &DynTerm) -> DynTerm {
    match &v.kind {
        DynKind::Tuple {
            proofs: Some(ps),
            items,
        } => {
            let kept: Vec<ProofTerm> = ps
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.get(*i).copied().unwrap_or(false))
                .map(|(_, p)| p.clone())
                .collect();
            if kept.is_empty() && items.len() == 1 {
                items[0].clone()
            } else {
                DynTerm::new(
                    DynKind::Tuple {
                        proofs: Some(kept),
                        items: items.clone(),
                    },
                    v.span,
                )
            }
        }
        _ => v.clone(),
    }
}

fn match_dyn(pat: &DynPat, v: &DynTerm, sub: &mut Subst) -> Result<(), Stuck> {
    match &pat.kind {
        DynPatKind::Wild => Ok(()),
        DynPatKind::Var(x) => {
            sub.dyns.push((x.clone(), v.clone()));
            Ok(())
        }
        DynPatKind::Tuple { proofs, items } => {
            let (vps, vis): (&[ProofTerm], Vec<DynTerm>) = match &v.kind {
                DynKind::Tuple { proofs, items } => {
                    (proofs.as_deref().unwrap_or(&[]), items.clone())
                }
                _ => (&[], vec![v.clone()]),
            };
            if let Some(pps) = proofs {
                if pps.len() == vps.len() {
                    for (p, pv) in pps.iter().zip(vps) {
                        match_proof(p, pv, false, sub)?;
                    }
                } else if pps.len() == 1 {
                    let tuple = ProofTerm::new(ProofKind::Tuple(vps.to_vec()), v.span);
                    match_proof(&pps[0], &tuple, false, sub)?;
                } else {
                    return malformed("proof pattern does not match the value", pat.span);
                }
            }
            if items.len() == vis.len() {
                for (p, x) in items.iter().zip(&vis) {
                    match_dyn(p, x, sub)?;
                }
                Ok(())
            } else if items.len() == 1 {
                let tuple = DynTerm::new(
                    DynKind::Tuple {
                        proofs: None,
                        items: vis,
                    },
                    v.span,
                );
                match_dyn(&items[0], &tuple, sub)
            } else {
                malformed("pattern does not match the value", pat.span)
            }
        }
    }
}

fn match_proof(pat: &ProofPat, v: &ProofTerm, boxed: bool, sub: &mut Subst) -> Result<(), Stuck> {
    let wrap = |p: &ProofTerm| {
        if boxed {
            ProofTerm::new(
                ProofKind::Call {
                    func: "viewbox".into(),
                    statics: None,
                    args: vec![p.clone()],
                },
                p.span,
            )
        } else {
            p.clone()
        }
    };
    match (&pat.kind, &v.kind) {
        (ProofPatKind::Wild, _) => Ok(()),
        (ProofPatKind::Var(x), _) => {
            sub.proofs.push((x.clone(), wrap(v)));
            Ok(())
        }
        (_, ProofKind::Call { func, args, .. }) if func == "viewbox" && args.len() == 1 => {
            match_proof(pat, &args[0], true, sub)
        }
        (ProofPatKind::Tuple(ps), ProofKind::Tuple(vs)) if ps.len() == vs.len() => {
            for (p, x) in ps.iter().zip(vs) {
                match_proof(p, x, boxed, sub)?;
            }
            Ok(())
        }
        (ProofPatKind::Tuple(ps), _) if ps.len() == 1 => match_proof(&ps[0], v, boxed, sub),
        (ProofPatKind::Con(c, ps), ProofKind::Con(c2, vs)) if c == c2 && ps.len() == vs.len() => {
            for (p, x) in ps.iter().zip(vs) {
                match_proof(p, x, boxed, sub)?;
            }
            Ok(())
        }
        _ => malformed(
            format!("proof `{}` does not match its pattern", v),
            pat.span,
        ),
    }
}
