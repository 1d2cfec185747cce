//! Dynamic terms: values, calls, branches, bindings and functions.

use std::cell::RefCell;

use crate::diag::{Diagnostic, Span};
use crate::statics::{ArrowKind, CmpOp, IntOp, Sort, StaticTerm as S};
use crate::syntax::ast::{BinOp, FunKind};
use crate::terms::{
    DynDecl, DynKind, DynPat, DynPatKind, DynTerm, FunBody, FunDef, LamParam, ProofTerm,
};

use super::relate::{components, items};
use super::{Checker, FunFrame, R};
use crate::decls::{FunSig, ParamSig};

pub(crate) struct CallInst {
    pub ret: S,
    pub sub: Vec<(crate::statics::Name, S)>,
    pub dropped: Vec<bool>,
}

fn err(rule: &str, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(rule, span, msg)
}

type Branch<'b, 'a> = &'b mut dyn FnMut(&mut Checker<'a>) -> R<()>;

impl<'a> Checker<'a> {
    /// Checks two branches under `cond` and its negation. Both must consume
    /// the same linear variables; a branch with inconsistent hypotheses is
    /// skipped.
    pub(crate) fn branch2<'b>(
        &mut self,
        cond: &S,
        span: Span,
        f1: Branch<'b, 'a>,
        f2: Branch<'b, 'a>,
    ) -> R<()> {
        let before = self.consumed_flags();
        let n = before.len();
        let m = self.mark();
        let c = self.zonk(cond);
        let nc = S::not(c.clone());
        let mut results = Vec::new();
        for (hyp, f) in [(c, f1), (nc, f2)] {
            self.set_consumed_flags(&before);
            if !self.live_with(std::slice::from_ref(&hyp)) {
                results.push(None);
                continue;
            }
            self.assume(hyp);
            let r = f(self);
            let flags: Vec<bool> = self.consumed_flags()[..n].to_vec();
            self.reset(m);
            r?;
            results.push(Some(flags));
        }
        let (r1, r2) = (results[0].take(), results[1].take());
        match (r1, r2) {
            (Some(a), Some(b)) => {
                if let Some(i) = (0..n).find(|&i| a[i] != b[i]) {
                    let e = &self.vars[i];
                    let which = if a[i] { "then" } else { "else" };
                    return Err(err(
                        "branch-linear",
                        span,
                        format!(
                            "linear {} `{}` is consumed only in the {} branch",
                            if e.proof { "proof" } else { "value" },
                            e.name,
                            which
                        ),
                    ));
                }
                self.set_consumed_flags(&a);
            }
            (Some(a), None) | (None, Some(a)) => self.set_consumed_flags(&a),
            (None, None) => self.set_consumed_flags(&before),
        }
        Ok(())
    }

    /// The branch condition carried by a boolean type.
    fn condition(&mut self, c: &DynTerm) -> R<S> {
        let t = self.synth_dyn(c)?;
        match self.open(&t) {
            S::BoolOf(b) => Ok(*b),
            S::BoolTy => Ok(self.skolem("b", Sort::Bool)),
            other => Err(err(
                "type-mismatch",
                c.span,
                format!("condition has type `{}`, expected `bool`", other),
            )),
        }
    }

    pub(crate) fn dyn_decls(&mut self, ds: &[DynDecl]) -> R<()> {
        for d in ds {
            match d {
                DynDecl::Val { pat, rhs, .. } => {
                    let t = self.synth_dyn(rhs)?;
                    self.bind_dyn_pat(pat, &t)?;
                }
                DynDecl::PrVal { pat, rhs, .. } => {
                    let v = self.synth_proof(rhs)?;
                    self.bind_proof_pat(pat, &v, false)?;
                }
                DynDecl::Fun(f) => self.local_fundef(f)?,
            }
        }
        Ok(())
    }

    fn bind_dyn_pat(&mut self, pat: &DynPat, ty: &S) -> R<()> {
        let sp = pat.span;
        let t = self.open(ty);
        match &pat.kind {
            DynPatKind::Wild => {
                if self.is_linear(&t) {
                    return Err(err(
                        "linear",
                        sp,
                        format!("`_` discards a linear value of type `{}`", t),
                    ));
                }
                Ok(())
            }
            DynPatKind::Var(x) => {
                self.push_var(x, false, t, false, sp);
                Ok(())
            }
            DynPatKind::Tuple { proofs, items: ps } => {
                let (v, tt) = match &t {
                    S::VAnd(v, tt) => ((**v).clone(), (**tt).clone()),
                    other => (S::Emp, other.clone()),
                };
                match proofs {
                    Some(pps) => {
                        let comps = components(&v);
                        if comps.len() != pps.len() {
                            return Err(err(
                                "pattern",
                                sp,
                                format!(
                                    "pattern binds {} proofs but `{}` carries {}",
                                    pps.len(),
                                    t,
                                    comps.len()
                                ),
                            ));
                        }
                        for (p, c) in pps.iter().zip(&comps) {
                            self.bind_proof_pat(p, c, false)?;
                        }
                    }
                    None => {
                        if self.is_linear(&v) {
                            return Err(err(
                                "linear",
                                sp,
                                format!("pattern drops the proofs carried by `{}`", t),
                            ));
                        }
                    }
                }
                let its = items(&tt, ps.len());
                if its.len() != ps.len() {
                    return Err(err(
                        "pattern",
                        sp,
                        format!(
                            "pattern has {} items but `{}` has {}",
                            ps.len(),
                            tt,
                            its.len()
                        ),
                    ));
                }
                for (p, it) in ps.iter().zip(&its) {
                    self.bind_dyn_pat(p, it)?;
                }
                Ok(())
            }
        }
    }

    /// Hides all current variables, as a function body may not capture
    /// linear resources.
    fn hide_all(&mut self) -> Vec<bool> {
        let saved = self.vars.iter().map(|e| e.hidden).collect();
        for e in &mut self.vars {
            e.hidden = true;
        }
        saved
    }

    fn unhide(&mut self, saved: &[bool]) {
        for (e, h) in self.vars.iter_mut().zip(saved) {
            e.hidden = *h;
        }
    }

    /// Checks a function definition's body against its signature.
    pub(crate) fn fundef_body(&mut self, def: &FunDef) -> R<()> {
        let sig = &def.sig;
        let m = self.mark();
        for q in &sig.quants {
            match q {
                crate::decls::Quant::Bind(n, s) => self.sigma.push(n.clone(), *s),
                crate::decls::Quant::Guard(b) => self.assume(b.clone()),
            }
        }
        self.fun_stack.push(FunFrame {
            name: sig.name.clone(),
            metric: sig.metric.clone(),
            kind: sig.kind,
        });
        for p in sig.inv.iter().chain(&sig.proofs) {
            self.push_var(&p.name, true, p.ty.clone(), false, p.span);
        }
        for p in &sig.args {
            self.push_var(&p.name, false, p.ty.clone(), false, p.span);
        }
        let r = match &def.body {
            FunBody::Dyn(d) => self.check_dyn(d, &sig.full_ret()),
            FunBody::Proof(p) => self.check_proof(p, &sig.ret),
            FunBody::Extern => Ok(()),
        }
        .and_then(|_| {
            if matches!(def.body, FunBody::Extern) {
                Ok(())
            } else {
                self.check_consumed(m.vars, def.span)
            }
        });
        self.fun_stack.pop();
        self.reset(m);
        r
    }

    pub(crate) fn local_fundef(&mut self, def: &FunDef) -> R<()> {
        self.locals.push((def.sig.name.clone(), def.sig.clone()));
        let saved = self.hide_all();
        let r = self.fundef_body(def);
        self.unhide(&saved);
        r
    }

    fn split_inv(
        &self,
        inv: &[ProofTerm],
        proofs: &[ProofTerm],
        n_inv: usize,
    ) -> (Vec<ProofTerm>, Vec<ProofTerm>) {
        if inv.is_empty() && n_inv > 0 && proofs.len() >= n_inv {
            (proofs[..n_inv].to_vec(), proofs[n_inv..].to_vec())
        } else {
            (inv.to_vec(), proofs.to_vec())
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dyn_call(
        &mut self,
        func: &str,
        statics: Option<&[S]>,
        inv: &[ProofTerm],
        proofs: &[ProofTerm],
        args: &[DynTerm],
        sp: Span,
    ) -> R<S> {
        let Some(sig) = self.fun_sig(func) else {
            return Err(err("scope", sp, format!("unknown function `{}`", func)));
        };
        if sig.kind == FunKind::PrFun {
            return Err(err(
                "proof-class",
                sp,
                format!("proof function `{}` is called as a function", func),
            ));
        }
        Ok(self.call_sig(&sig, statics, inv, proofs, args, sp)?.ret)
    }

    /// Checks a call against `sig`, returning the result type and the
    /// static instantiation.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn call_sig(
        &mut self,
        sig: &FunSig,
        statics: Option<&[S]>,
        inv: &[ProofTerm],
        proofs: &[ProofTerm],
        args: &[DynTerm],
        sp: Span,
    ) -> R<CallInst> {
        let func = &sig.name;
        let (inv, proofs) = self.split_inv(inv, proofs, sig.inv.len());
        if inv.len() != sig.inv.len()
            || proofs.len() != sig.proofs.len()
            || args.len() != sig.args.len()
        {
            return Err(err(
                "arity",
                sp,
                format!(
                    "`{}` takes {} invariant proofs, {} proofs and {} arguments; given {}, {} and {}",
                    func,
                    sig.inv.len(),
                    sig.proofs.len(),
                    sig.args.len(),
                    inv.len(),
                    proofs.len(),
                    args.len()
                ),
            ));
        }
        let (sub, guards) = self.inst_quants(sig, statics, sp)?;
        if func == "setPtr" && statics.is_none() {
            if let Some((_, a)) = sub.first() {
                self.cell_sites.push((sp, a.clone()));
            }
        }
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (a, p) in inv.iter().zip(&sig.inv) {
            let want = p.ty.subst(&sub);
            let got = self.synth_proof(a)?;
            match self.zonk(&got) {
                S::Boxed(inner) => {
                    self.relate(&inner, &want, a.span)?;
                    dropped.push(true);
                }
                _ => {
                    self.subsume(&got, &want, a.span)?;
                    kept.push(want);
                    dropped.push(false);
                }
            }
        }
        for (a, p) in proofs.iter().zip(&sig.proofs) {
            self.check_proof(a, &p.ty.subst(&sub))?;
        }
        for (a, p) in args.iter().zip(&sig.args) {
            self.check_dyn(a, &p.ty.subst(&sub))?;
        }
        for g in guards {
            self.oblige(g, sp, "guard", format!("the guard of `{}`", func))?;
        }
        self.recursion_check(sig, &sub, sp)?;
        let ret = sig.ret.subst(&sub);
        let ret = if kept.is_empty() {
            ret
        } else {
            let s2 = FunSig {
                inv: kept
                    .into_iter()
                    .map(|ty| ParamSig {
                        name: String::new(),
                        ty,
                        span: sp,
                    })
                    .collect(),
                ret,
                ..sig.clone()
            };
            s2.full_ret()
        };
        Ok(CallInst {
            ret: self.zonk(&ret),
            sub,
            dropped,
        })
    }

    fn apply(&mut self, ft: &S, proofs: &[ProofTerm], args: &[DynTerm], sp: Span) -> R<S> {
        let ft = self.open(ft);
        let ft = self.instantiate(&ft, sp, "a function application")?;
        match self.zonk(&ft) {
            S::Arrow(_, dom, cod) => {
                let (v, t) = match *dom {
                    S::VAnd(v, t) => (*v, *t),
                    t => (S::Emp, t),
                };
                self.apply_parts(&v, &t, proofs, args, sp)?;
                Ok(*cod)
            }
            S::ViewArrow(_, v, cod) => {
                self.apply_parts(&v, &S::Unit, proofs, args, sp)?;
                Ok(*cod)
            }
            other => Err(err(
                "type-mismatch",
                sp,
                format!("a value of type `{}` is applied as a function", other),
            )),
        }
    }

    fn apply_parts(
        &mut self,
        v: &S,
        t: &S,
        proofs: &[ProofTerm],
        args: &[DynTerm],
        sp: Span,
    ) -> R<()> {
        let pv = components(v);
        let ts = items(t, args.len());
        if pv.len() != proofs.len() || ts.len() != args.len() {
            return Err(err(
                "arity",
                sp,
                format!(
                    "function expects {} proofs and {} arguments; given {} and {}",
                    pv.len(),
                    ts.len(),
                    proofs.len(),
                    args.len()
                ),
            ));
        }
        for (p, w) in proofs.iter().zip(&pv) {
            self.check_proof(p, w)?;
        }
        for (a, w) in args.iter().zip(&ts) {
            self.check_dyn(a, w)?;
        }
        Ok(())
    }

    fn binop(&mut self, op: BinOp, a: &DynTerm, b: &DynTerm, sp: Span) -> R<S> {
        let ta = self.synth_dyn(a)?;
        let ta = self.open(&ta);
        let tb = self.synth_dyn(b)?;
        let tb = self.open(&tb);
        let int_op = |op: BinOp| match op {
            BinOp::Add => Some(IntOp::Add),
            BinOp::Sub => Some(IntOp::Sub),
            BinOp::Mul => Some(IntOp::Mul),
            _ => None,
        };
        let cmp_op = |op: BinOp| match op {
            BinOp::Lt => Some(CmpOp::Lt),
            BinOp::Le => Some(CmpOp::Le),
            BinOp::Gt => Some(CmpOp::Gt),
            BinOp::Ge => Some(CmpOp::Ge),
            BinOp::Eq => Some(CmpOp::Eq),
            BinOp::Ne => Some(CmpOp::Ne),
            _ => None,
        };
        let bad = |ta: &S, tb: &S| {
            err(
                "type-mismatch",
                sp,
                format!(
                    "operator `{}` cannot combine `{}` and `{}`",
                    op.symbol(),
                    ta,
                    tb
                ),
            )
        };
        if let Some(io) = int_op(op) {
            return match (&ta, &tb) {
                (S::IntOf(i), S::IntOf(j)) => {
                    Ok(S::IntOf(Box::new(S::IntOp(io, i.clone(), j.clone()))))
                }
                (S::IntOf(_) | S::IntTy, S::IntOf(_) | S::IntTy) => Ok(S::IntTy),
                (S::Ptr(l), S::IntOf(i)) if io != IntOp::Mul => {
                    Ok(S::Ptr(Box::new(S::IntOp(io, l.clone(), i.clone()))))
                }
                _ => Err(bad(&ta, &tb)),
            };
        }
        if let Some(co) = cmp_op(op) {
            return match (&ta, &tb) {
                (S::IntOf(i), S::IntOf(j)) | (S::Ptr(i), S::Ptr(j)) => {
                    if matches!(ta, S::Ptr(_)) && !matches!(co, CmpOp::Eq | CmpOp::Ne) {
                        return Err(bad(&ta, &tb));
                    }
                    Ok(S::BoolOf(Box::new(S::Cmp(co, i.clone(), j.clone()))))
                }
                (S::BoolOf(i), S::BoolOf(j)) if matches!(co, CmpOp::Eq | CmpOp::Ne) => {
                    Ok(S::BoolOf(Box::new(S::Cmp(co, i.clone(), j.clone()))))
                }
                (S::IntOf(_) | S::IntTy, S::IntOf(_) | S::IntTy) => Ok(S::BoolTy),
                (S::BoolOf(_) | S::BoolTy, S::BoolOf(_) | S::BoolTy)
                    if matches!(co, CmpOp::Eq | CmpOp::Ne) =>
                {
                    Ok(S::BoolTy)
                }
                _ => Err(bad(&ta, &tb)),
            };
        }
        match (&ta, &tb) {
            (S::BoolOf(i), S::BoolOf(j)) => Ok(S::BoolOf(Box::new(if op == BinOp::And {
                S::And(i.clone(), j.clone())
            } else {
                S::Or(i.clone(), j.clone())
            }))),
            (S::BoolOf(_) | S::BoolTy, S::BoolOf(_) | S::BoolTy) => Ok(S::BoolTy),
            _ => Err(bad(&ta, &tb)),
        }
    }

    fn lam_type(
        &mut self,
        once: bool,
        proofs: &[LamParam],
        params: &[LamParam],
        body: &DynTerm,
        sp: Span,
    ) -> R<S> {
        let mut pv = Vec::new();
        let mut ts = Vec::new();
        for p in proofs.iter().chain(params) {
            let Some(t) = &p.ty else {
                return Err(err(
                    "infer",
                    p.span,
                    format!(
                        "annotate parameter `{}` or give the function an expected type",
                        p.name
                    ),
                ));
            };
            if proofs.iter().any(|q| q.name == p.name) {
                pv.push(t.clone());
            } else {
                ts.push(t.clone());
            }
        }
        let m = self.mark();
        let saved = if once { None } else { Some(self.hide_all()) };
        for (p, v) in proofs.iter().zip(&pv) {
            self.push_var(&p.name, true, v.clone(), false, p.span);
        }
        for (p, t) in params.iter().zip(&ts) {
            self.push_var(&p.name, false, t.clone(), false, p.span);
        }
        let r = self.synth_dyn(body).and_then(|t| {
            self.check_consumed(m.vars, sp)?;
            Ok(self.zonk(&t))
        });
        if let Some(s) = saved {
            self.unhide(&s);
        }
        let body_t = self.pack(r?, m.sigma, m.hyps);
        self.reset(m);
        let kind = if once {
            ArrowKind::Once
        } else {
            ArrowKind::Pure
        };
        Ok(S::Arrow(
            kind,
            Box::new(S::viewtype(pv, ts)),
            Box::new(body_t),
        ))
    }

    pub(crate) fn synth_dyn(&mut self, e: &DynTerm) -> R<S> {
        let sp = e.span;
        match &e.kind {
            DynKind::Var(x) => {
                if let Some(t) = self.use_var(x, false, sp)? {
                    return Ok(t);
                }
                match self.fun_sig(x) {
                    Some(sig) => Ok(sig.formal()),
                    None => Err(err("scope", sp, format!("unbound variable `{}`", x))),
                }
            }
            DynKind::FunRef(n) => match self.fun_sig(n) {
                Some(sig) => Ok(sig.formal()),
                None => Err(err("scope", sp, format!("unknown function `{}`", n))),
            },
            DynKind::Closure(def) => {
                let n = self.locals.len();
                self.locals.push((def.sig.name.clone(), def.sig.clone()));
                let saved = self.hide_all();
                let r = self.fundef_body(def);
                self.unhide(&saved);
                self.locals.truncate(n);
                r?;
                Ok(def.sig.formal())
            }
            DynKind::Int(i) => Ok(S::IntOf(Box::new(S::Int(*i)))),
            DynKind::Bool(b) => Ok(S::BoolOf(Box::new(S::Bool(*b)))),
            DynKind::Null => Ok(S::Ptr(Box::new(S::Addr(0)))),
            DynKind::Loc(l) => Ok(S::Ptr(Box::new(S::Addr(*l)))),
            DynKind::Tuple { proofs, items } => {
                let mut ts = Vec::new();
                for x in items {
                    ts.push(self.synth_dyn(x)?);
                }
                match proofs {
                    Some(ps) => {
                        let mut vs = Vec::new();
                        for p in ps {
                            vs.push(self.synth_proof(p)?);
                        }
                        Ok(S::vand(S::tensor(vs), S::prod(ts)))
                    }
                    None => Ok(match ts.len() {
                        0 => S::Unit,
                        _ => S::Prod(ts),
                    }),
                }
            }
            DynKind::Call {
                func,
                statics,
                inv,
                proofs,
                args,
                ..
            } => {
                if let Some(t) = self.use_var(func, false, sp)? {
                    let mut all = inv.clone();
                    all.extend(proofs.iter().cloned());
                    return self.apply(&t, &all, args, sp);
                }
                self.dyn_call(func, statics.as_deref(), inv, proofs, args, sp)
            }
            DynKind::App { func, proofs, args } => {
                let ft = self.synth_dyn(func)?;
                self.apply(&ft, proofs, args, sp)
            }
            DynKind::BinOp(op, a, b) => self.binop(*op, a, b, sp),
            DynKind::If(c, a, b) => {
                let cond = self.condition(c)?;
                self.synth_branches(&cond, a, b, sp)
            }
            DynKind::Sif(cond, a, b) => self.synth_branches(cond, a, b, sp),
            DynKind::Let(ds, body) => {
                let m = self.mark();
                let r = self.dyn_decls(ds).and_then(|_| {
                    let t = self.synth_dyn(body)?;
                    self.check_consumed(m.vars, sp)?;
                    Ok(self.zonk(&t))
                });
                let t = r.map(|t| self.pack(t, m.sigma, m.hyps));
                self.reset(m);
                t
            }
            DynKind::Lam {
                once,
                proofs,
                params,
                body,
            } => self.lam_type(*once, proofs, params, body, sp),
            DynKind::Fix {
                name,
                params,
                ret,
                body,
            } => {
                let Some(ret) = ret else {
                    return Err(err(
                        "infer",
                        sp,
                        format!("annotate the result of `fix {}`", name),
                    ));
                };
                let mut ts = Vec::new();
                for p in params {
                    match &p.ty {
                        Some(t) => ts.push(t.clone()),
                        None => {
                            return Err(err(
                                "infer",
                                p.span,
                                format!("annotate parameter `{}`", p.name),
                            ))
                        }
                    }
                }
                let ft = S::Arrow(
                    ArrowKind::Pure,
                    Box::new(S::prod(ts.clone())),
                    Box::new(ret.clone()),
                );
                let m = self.mark();
                let saved = self.hide_all();
                self.push_var(name, false, ft.clone(), false, sp);
                for (p, t) in params.iter().zip(&ts) {
                    self.push_var(&p.name, false, t.clone(), false, p.span);
                }
                let r = self
                    .check_dyn(body, ret)
                    .and_then(|_| self.check_consumed(m.vars, sp));
                self.unhide(&saved);
                self.reset(m);
                r?;
                Ok(ft)
            }
            DynKind::Ann(x, t) => {
                self.check_dyn(x, t)?;
                Ok(t.clone())
            }
            DynKind::Frame { ret, body } => {
                self.check_dyn(body, ret)?;
                Ok(ret.clone())
            }
            DynKind::Release { drop, body } => {
                let m = self.mark();
                let t = self.synth_dyn(body)?;
                let t = match self.open(&t) {
                    S::VAnd(v, t) => {
                        let kept: Vec<S> = components(&v)
                            .into_iter()
                            .enumerate()
                            .filter(|(i, _)| !drop.get(*i).copied().unwrap_or(false))
                            .map(|(_, c)| c)
                            .collect();
                        S::vand(S::tensor(kept), *t)
                    }
                    other => other,
                };
                let t = self.pack(t, m.sigma, m.hyps);
                self.reset(m);
                Ok(t)
            }
        }
    }

    fn synth_branches(&mut self, cond: &S, a: &DynTerm, b: &DynTerm, sp: Span) -> R<S> {
        let out: RefCell<Option<S>> = RefCell::new(None);
        self.branch2(
            cond,
            sp,
            &mut |c: &mut Checker<'a>| {
                let m = c.mark();
                let t = c.synth_dyn(a)?;
                let t = c.pack(c.zonk(&t), m.sigma, m.hyps);
                *out.borrow_mut() = Some(t);
                Ok(())
            },
            &mut |c: &mut Checker<'a>| {
                let prev = out.borrow().clone();
                match prev {
                    Some(t) => c.check_dyn(b, &t),
                    None => {
                        let m = c.mark();
                        let t = c.synth_dyn(b)?;
                        let t = c.pack(c.zonk(&t), m.sigma, m.hyps);
                        *out.borrow_mut() = Some(t);
                        Ok(())
                    }
                }
            },
        )?;
        let t = out.into_inner();
        Ok(t.unwrap_or(S::Unit))
    }

    pub(crate) fn check_dyn(&mut self, e: &DynTerm, want: &S) -> R<()> {
        let sp = e.span;
        match self.zonk(want) {
            S::Guard(b, x) => {
                let m = self.mark();
                self.assume(*b);
                let r = self.check_dyn(e, &x);
                self.hyps.truncate(m.hyps);
                return r;
            }
            S::Forall(n, s, x) => {
                let m = self.mark();
                let k = self.skolem(&n, s);
                let r = self.check_dyn(e, &x.subst(&[(n, k)]));
                self.sigma.truncate(m.sigma);
                return r;
            }
            _ => {}
        }
        match &e.kind {
            DynKind::Tuple { proofs, items: xs } => {
                let mut w = self.zonk(want);
                let mut asserts = Vec::new();
                loop {
                    match w {
                        S::Exists(n, s, b) => {
                            let m = self.fresh_meta(s, sp);
                            w = b.subst(&[(n, m)]);
                        }
                        S::Assert(p, b) => {
                            asserts.push(*p);
                            w = *b;
                        }
                        other => {
                            w = other;
                            break;
                        }
                    }
                }
                let (v, t) = match &w {
                    S::VAnd(v, t) => ((**v).clone(), (**t).clone()),
                    other => (S::Emp, other.clone()),
                };
                let pv = components(&v);
                let ps: &[ProofTerm] = proofs.as_deref().unwrap_or(&[]);
                let ts = items(&t, xs.len());
                if pv.len() != ps.len() || ts.len() != xs.len() {
                    let got = self.synth_dyn(e)?;
                    self.relate(&got, &w, sp)?;
                } else {
                    for (p, c) in ps.iter().zip(&pv) {
                        self.check_proof(p, c)?;
                    }
                    for (x, c) in xs.iter().zip(&ts) {
                        self.check_dyn(x, c)?;
                    }
                }
                for p in asserts {
                    self.oblige(p, sp, "assert", "a packed assertion".into())?;
                }
                Ok(())
            }
            DynKind::If(c, a, b) => {
                let cond = self.condition(c)?;
                let w = want.clone();
                self.branch2(
                    &cond,
                    sp,
                    &mut |ck: &mut Checker<'a>| ck.check_dyn(a, &w),
                    &mut |ck: &mut Checker<'a>| ck.check_dyn(b, &w),
                )
            }
            DynKind::Sif(cond, a, b) => {
                let w = want.clone();
                self.branch2(
                    cond,
                    sp,
                    &mut |ck: &mut Checker<'a>| ck.check_dyn(a, &w),
                    &mut |ck: &mut Checker<'a>| ck.check_dyn(b, &w),
                )
            }
            DynKind::Let(ds, body) => {
                let m = self.mark();
                let r = self.dyn_decls(ds).and_then(|_| {
                    self.check_dyn(body, want)?;
                    self.check_consumed(m.vars, sp)
                });
                self.reset(m);
                r
            }
            DynKind::Lam {
                once,
                proofs,
                params,
                body,
            } => {
                let w = self.zonk(want);
                let S::Arrow(k, dom, cod) = &w else {
                    let got = self.synth_dyn(e)?;
                    return self.subsume(&got, want, sp);
                };
                if *once && *k == ArrowKind::Pure {
                    return Err(err(
                        "linear",
                        sp,
                        "a once-only `llam` is used where a reusable function is expected",
                    ));
                }
                let (v, t) = match &**dom {
                    S::VAnd(v, t) => ((**v).clone(), (**t).clone()),
                    other => (S::Emp, other.clone()),
                };
                let pv = components(&v);
                let ts = items(&t, params.len());
                if pv.len() != proofs.len() || ts.len() != params.len() {
                    return Err(err(
                        "arity",
                        sp,
                        format!("function literal does not match `{}`", w),
                    ));
                }
                let m = self.mark();
                let saved = if *once { None } else { Some(self.hide_all()) };
                let mut r = Ok(());
                for (p, d) in proofs.iter().zip(&pv).chain(params.iter().zip(&ts)) {
                    let ty = match &p.ty {
                        Some(ann) => {
                            if let Err(e) = self.relate(d, ann, p.span) {
                                r = Err(e);
                            }
                            ann.clone()
                        }
                        None => d.clone(),
                    };
                    let is_proof = proofs.iter().any(|q| std::ptr::eq(q, p));
                    self.push_var(&p.name, is_proof, ty, false, p.span);
                }
                let r = r
                    .and_then(|_| self.check_dyn(body, cod))
                    .and_then(|_| self.check_consumed(m.vars, sp));
                if let Some(s) = saved {
                    self.unhide(&s);
                }
                self.reset(m);
                r
            }
            _ => {
                let got = self.synth_dyn(e)?;
                self.subsume(&got, want, sp)
            }
        }
    }
}
