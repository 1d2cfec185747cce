//! Proof terms: views, constructors, proof functions and proof patterns.

use crate::decls::{FunSig, ProofConSig, Quant};
use crate::diag::{Diagnostic, Span};
use crate::statics::{fresh_name, CmpOp, Name, Sort, StaticTerm as S};
use crate::syntax::ast::FunKind;
use crate::terms::{ProofDecl, ProofKind, ProofPat, ProofPatKind, ProofTerm};

use super::relate::components;
use super::{Checker, R};

fn err(rule: &str, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(rule, span, msg)
}

/// How a constructor's indices line up with a scrutinee.
pub(crate) struct Refinement {
    pub sub: Vec<(Name, S)>,
    pub skolems: Vec<(Name, Sort)>,
    pub hyps: Vec<S>,
}

impl<'a> Checker<'a> {
    pub(crate) fn fun_sig(&self, name: &str) -> Option<FunSig> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s.clone())
            .or_else(|| self.env.funs.get(name).cloned())
    }

    /// Instantiates a signature's quantifiers with explicit statics, then metas.
    pub(crate) fn inst_quants(
        &mut self,
        sig: &FunSig,
        statics: Option<&[S]>,
        span: Span,
    ) -> R<(Vec<(Name, S)>, Vec<S>)> {
        let explicit = statics.unwrap_or(&[]);
        let nb = sig.binders().len();
        if explicit.len() > nb {
            return Err(err(
                "arity",
                span,
                format!(
                    "`{}` takes {} static arguments, {} given",
                    sig.name,
                    nb,
                    explicit.len()
                ),
            ));
        }
        let mut sub: Vec<(Name, S)> = Vec::new();
        let mut guards = Vec::new();
        let mut next = 0;
        for q in &sig.quants {
            match q {
                Quant::Bind(n, s) => {
                    let v = if next < explicit.len() {
                        let v = explicit[next].clone();
                        let got = crate::statics::sort_check(&mut self.sigma.clone(), self.env, &v)
                            .map_err(|e| err("sort", span, e.to_string()))?;
                        if !crate::statics::sort::subsort(got, *s) {
                            return Err(err(
                                "sort",
                                span,
                                format!("static argument `{}` has sort {}, expected {}", v, got, s),
                            ));
                        }
                        v
                    } else {
                        self.fresh_meta(*s, span)
                    };
                    next += 1;
                    sub.push((n.clone(), v));
                }
                Quant::Guard(b) => guards.push(b.subst(&sub)),
            }
        }
        Ok((sub, guards))
    }

    /// Termination side condition for a call to an enclosing function.
    pub(crate) fn recursion_check(&mut self, sig: &FunSig, sub: &[(Name, S)], span: Span) -> R<()> {
        let Some(frame) = self.fun_stack.iter().rev().find(|f| f.name == sig.name) else {
            return Ok(());
        };
        match frame.metric.clone() {
            Some(m) => {
                let m2: Vec<S> = m.iter().map(|t| t.subst(sub)).collect();
                let mut goal = S::Bool(false);
                for i in (0..m.len()).rev() {
                    let lt = S::cmp(CmpOp::Lt, m2[i].clone(), m[i].clone());
                    let eq = S::eq(m2[i].clone(), m[i].clone());
                    goal = S::Or(Box::new(lt), Box::new(S::and(eq, goal)));
                }
                let nonneg = S::conj(m2.iter().map(|t| S::cmp(CmpOp::Ge, t.clone(), S::Int(0))));
                self.oblige(
                    S::and(nonneg, goal),
                    span,
                    "termination",
                    format!("the termination metric of `{}`", sig.name),
                )
            }
            None if frame.kind == FunKind::PrFun => Err(err(
                "termination",
                span,
                format!(
                    "proof function `{}` calls itself but has no termination metric `.< .. >.`",
                    sig.name
                ),
            )),
            None => Ok(()),
        }
    }

    pub(crate) fn synth_proof(&mut self, p: &ProofTerm) -> R<S> {
        let v = self.synth_proof_inner(p)?;
        if self.trace_proofs {
            let shown = self.zonk(&v);
            self.proof_log.push((p.span, format!("{} : {}", p, shown)));
        }
        Ok(v)
    }

    fn synth_proof_inner(&mut self, p: &ProofTerm) -> R<S> {
        let sp = p.span;
        match &p.kind {
            ProofKind::Var(x) => match self.use_var(x, true, sp)? {
                Some(v) => Ok(v),
                None => Err(err("scope", sp, format!("unbound proof variable `{}`", x))),
            },
            ProofKind::Loc(l, ty) => {
                self.used_locs.push(*l);
                Ok(S::at(ty.clone(), S::Addr(*l)))
            }
            ProofKind::Tuple(xs) => {
                let mut vs = Vec::new();
                for x in xs {
                    vs.push(self.synth_proof(x)?);
                }
                Ok(match vs.len() {
                    0 => S::Emp,
                    _ => S::Tensor(vs),
                })
            }
            ProofKind::Con(c, args) => {
                let (sig, sub) = self.con_inst(c, sp)?;
                self.con_args(&sig, &sub, args, sp)?;
                Ok(self.zonk(&sig.result.subst(&sub)))
            }
            ProofKind::Call {
                func,
                statics,
                args,
            } => self.prfun_call(func, statics.as_deref(), args, sp),
            ProofKind::Lam { param, view, body } => {
                let Some(view) = view else {
                    return Err(err(
                        "infer",
                        sp,
                        format!("annotate the view of proof parameter `{}`", param),
                    ));
                };
                let m = self.mark();
                self.push_var(param, true, view.clone(), false, sp);
                let r = self.synth_proof(body);
                let r = r.and_then(|b| {
                    self.check_consumed(m.vars, sp)?;
                    Ok(b)
                });
                self.reset(m);
                Ok(S::Lolli(Box::new(view.clone()), Box::new(r?)))
            }
            ProofKind::App(f, a) => {
                let fv = self.synth_proof(f)?;
                let fv = self.instantiate(&fv, sp, "a proof function application")?;
                match self.zonk(&fv) {
                    S::Lolli(dom, cod) => {
                        self.check_proof(a, &dom)?;
                        Ok(*cod)
                    }
                    other => Err(err(
                        "type-mismatch",
                        sp,
                        format!("`{}` : `{}` is not a proof function", f, other),
                    )),
                }
            }
            ProofKind::Let(ds, body) => {
                let m = self.mark();
                let r = self.proof_decls(ds).and_then(|_| {
                    let v = self.synth_proof(body)?;
                    self.check_consumed(m.vars, sp)?;
                    Ok(self.zonk(&v))
                });
                let v = self.pack(r?, m.sigma, m.hyps);
                self.reset(m);
                Ok(v)
            }
            ProofKind::Sif(b, x, y) => {
                let out: std::cell::RefCell<Option<S>> = std::cell::RefCell::new(None);
                self.branch2(
                    b,
                    sp,
                    &mut |c: &mut Checker<'a>| {
                        let m = c.mark();
                        let v = c.synth_proof(x)?;
                        let v = c.pack(c.zonk(&v), m.sigma, m.hyps);
                        *out.borrow_mut() = Some(v);
                        Ok(())
                    },
                    &mut |c: &mut Checker<'a>| {
                        let prev = out.borrow().clone();
                        match prev {
                            Some(v) => c.check_proof(y, &v),
                            None => {
                                let m = c.mark();
                                let v = c.synth_proof(y)?;
                                let v = c.pack(c.zonk(&v), m.sigma, m.hyps);
                                *out.borrow_mut() = Some(v);
                                Ok(())
                            }
                        }
                    },
                )?;
                Ok(out.into_inner().unwrap_or(S::Emp))
            }
            ProofKind::Ann(x, v) => {
                self.check_proof(x, v)?;
                Ok(v.clone())
            }
        }
    }

    fn prfun_call(
        &mut self,
        func: &str,
        statics: Option<&[S]>,
        args: &[ProofTerm],
        sp: Span,
    ) -> R<S> {
        if func == "viewbox" {
            if args.len() != 1 {
                return Err(err("arity", sp, "`viewbox` takes one proof"));
            }
            let v = self.synth_proof(&args[0])?;
            let v = self.zonk(&v);
            if matches!(v, S::Boxed(_)) {
                return Err(err("box", sp, format!("`{}` is already boxed", v)));
            }
            return Ok(S::Boxed(Box::new(v)));
        }
        let Some(sig) = self.fun_sig(func) else {
            return Err(err(
                "scope",
                sp,
                format!("unknown proof function `{}`", func),
            ));
        };
        if sig.kind != FunKind::PrFun {
            return Err(err(
                "proof-class",
                sp,
                format!("`{}` is a function, not a proof function", func),
            ));
        }
        let (sub, guards) = self.inst_quants(&sig, statics, sp)?;
        if args.len() != sig.proofs.len() {
            return Err(err(
                "arity",
                sp,
                format!(
                    "`{}` takes {} proofs, {} given",
                    func,
                    sig.proofs.len(),
                    args.len()
                ),
            ));
        }
        for (a, p) in args.iter().zip(&sig.proofs) {
            let want = p.ty.subst(&sub);
            self.check_proof(a, &want)?;
        }
        for g in guards {
            self.oblige(g, sp, "guard", format!("the guard of `{}`", func))?;
        }
        self.recursion_check(&sig, &sub, sp)?;
        Ok(self.zonk(&sig.ret.subst(&sub)))
    }

    pub(crate) fn con_inst(&mut self, c: &str, sp: Span) -> R<(ProofConSig, Vec<(Name, S)>)> {
        let Some(sig) = self.env.cons.get(c).cloned() else {
            return Err(err(
                "scope",
                sp,
                format!("unknown proof constructor `{}`", c),
            ));
        };
        let sub = sig
            .binders
            .iter()
            .map(|(n, s)| (n.clone(), self.fresh_meta(*s, sp)))
            .collect();
        Ok((sig, sub))
    }

    fn con_args(
        &mut self,
        sig: &ProofConSig,
        sub: &[(Name, S)],
        args: &[ProofTerm],
        sp: Span,
    ) -> R<()> {
        if args.len() != sig.args.len() {
            return Err(err(
                "arity",
                sp,
                format!(
                    "constructor `{}` takes {} proofs, {} given",
                    sig.name,
                    sig.args.len(),
                    args.len()
                ),
            ));
        }
        for (a, v) in args.iter().zip(&sig.args) {
            self.check_proof(a, &v.subst(sub))?;
        }
        for g in &sig.guards {
            self.oblige(
                g.subst(sub),
                sp,
                "guard",
                format!("the guard of constructor `{}`", sig.name),
            )?;
        }
        Ok(())
    }

    pub(crate) fn check_proof(&mut self, p: &ProofTerm, want: &S) -> R<()> {
        let sp = p.span;
        if self.trace_proofs {
            let shown = self.zonk(want);
            self.proof_log.push((sp, format!("{} <= {}", p, shown)));
        }
        match self.zonk(want) {
            S::Guard(b, x) => {
                let m = self.mark();
                if !self.live_with(&[(*b).clone()]) {
                    self.consume_proof(p);
                    return Ok(());
                }
                self.assume(*b);
                let r = self.check_proof(p, &x);
                self.hyps.truncate(m.hyps);
                return r;
            }
            S::Assert(b, x) => {
                self.check_proof(p, &x)?;
                return self.oblige(*b, sp, "assert", "an asserted view".into());
            }
            S::Exists(n, s, x) => {
                let m = self.fresh_meta(s, sp);
                return self.check_proof(p, &x.subst(&[(n, m)]));
            }
            _ => {}
        }
        match &p.kind {
            ProofKind::Tuple(xs) => {
                let w = self.zonk(want);
                let comps = components(&w);
                if comps.len() != xs.len() {
                    // fall back to matching after full flattening
                    let got = self.synth_proof(p)?;
                    return self.relate(&got, &w, sp);
                }
                for (x, c) in xs.iter().zip(&comps) {
                    self.check_proof(x, c)?;
                }
                Ok(())
            }
            ProofKind::Con(c, args) => {
                let (sig, sub) = self.con_inst(c, sp)?;
                let res = sig.result.subst(&sub);
                let w = self.zonk(want);
                if let (S::App(n, _), S::App(wn, _)) = (&res, &w) {
                    if n != wn {
                        return Err(err(
                            "type-mismatch",
                            sp,
                            format!("constructor `{}` builds `{}`, expected `{}`", c, n, w),
                        ));
                    }
                }
                self.relate(&res, &w, sp)?;
                self.con_args(&sig, &sub, args, sp)
            }
            ProofKind::Let(ds, body) => {
                let m = self.mark();
                let r = self.proof_decls(ds).and_then(|_| {
                    self.check_proof(body, want)?;
                    self.check_consumed(m.vars, sp)
                });
                self.reset(m);
                r
            }
            ProofKind::Sif(b, x, y) => {
                let w = want.clone();
                self.branch2(
                    b,
                    sp,
                    &mut |c: &mut Checker| c.check_proof(x, &w),
                    &mut |c: &mut Checker| c.check_proof(y, &w),
                )
            }
            _ => {
                let got = self.synth_proof(p)?;
                self.subsume(&got, want, sp)
            }
        }
    }

    /// Marks every linear variable a dead term mentions as consumed.
    pub(crate) fn consume_proof(&mut self, p: &ProofTerm) {
        match &p.kind {
            ProofKind::Var(x) => {
                let _ = self.use_var(x, true, p.span);
            }
            ProofKind::Loc(l, _) => self.used_locs.push(*l),
            ProofKind::Tuple(xs) | ProofKind::Con(_, xs) => {
                xs.iter().for_each(|x| self.consume_proof(x))
            }
            ProofKind::Call { args, .. } => args.iter().for_each(|x| self.consume_proof(x)),
            ProofKind::Lam { body, .. } => self.consume_proof(body),
            ProofKind::App(f, a) => {
                self.consume_proof(f);
                self.consume_proof(a);
            }
            ProofKind::Let(ds, b) => {
                for d in ds {
                    if let ProofDecl::Val { rhs, .. } = d {
                        self.consume_proof(rhs);
                    }
                }
                self.consume_proof(b);
            }
            ProofKind::Sif(_, x, _) => self.consume_proof(x),
            ProofKind::Ann(x, _) => self.consume_proof(x),
        }
    }

    pub(crate) fn proof_decls(&mut self, ds: &[ProofDecl]) -> R<()> {
        for d in ds {
            match d {
                ProofDecl::Val { pat, rhs, .. } => {
                    let v = self.synth_proof(rhs)?;
                    self.bind_proof_pat(pat, &v, false)?;
                }
                ProofDecl::Fun(f) => self.local_fundef(f)?,
            }
        }
        Ok(())
    }

    /// Binds a proof pattern against a view, refining by constructor matches.
    pub(crate) fn bind_proof_pat(&mut self, pat: &ProofPat, view: &S, persistent: bool) -> R<()> {
        let sp = pat.span;
        let mut v = self.open(view);
        let mut persistent = persistent;
        if let S::Boxed(inner) = &v {
            if !matches!(pat.kind, ProofPatKind::Var(_) | ProofPatKind::Wild) {
                persistent = true;
                v = self.open(inner);
            }
        }
        match &pat.kind {
            ProofPatKind::Wild => {
                if !persistent && self.is_linear(&v) {
                    return Err(err(
                        "linear",
                        sp,
                        format!("`_` discards a linear proof of `{}`", v),
                    ));
                }
                Ok(())
            }
            ProofPatKind::Var(x) => {
                let ty = if persistent && !matches!(v, S::Boxed(_)) {
                    S::Boxed(Box::new(v))
                } else {
                    v
                };
                self.push_var(x, true, ty, persistent, sp);
                Ok(())
            }
            ProofPatKind::Tuple(ps) => {
                let comps = components(&v);
                if comps.len() != ps.len() {
                    return Err(err(
                        "pattern",
                        sp,
                        format!(
                            "pattern has {} components but `{}` has {}",
                            ps.len(),
                            v,
                            comps.len()
                        ),
                    ));
                }
                for (p, c) in ps.iter().zip(&comps) {
                    self.bind_proof_pat(p, c, persistent)?;
                }
                Ok(())
            }
            ProofPatKind::Con(c, ps) => {
                let Some(sig) = self.env.cons.get(c).cloned() else {
                    return Err(err(
                        "scope",
                        sp,
                        format!("unknown proof constructor `{}`", c),
                    ));
                };
                let (dv, idx) = match &v {
                    S::App(n, idx) if *n == sig.dataview => (n.clone(), idx.clone()),
                    _ => {
                        return Err(err(
                            "pattern",
                            sp,
                            format!("constructor `{}` cannot match a proof of `{}`", c, v),
                        ))
                    }
                };
                let Some(r) = self.refine(&sig, &idx) else {
                    return Err(err(
                        "pattern",
                        sp,
                        format!("constructor `{}` cannot match a proof of `{}`", c, v),
                    ));
                };
                // every other constructor must be impossible here
                let others = self.env.dataviews[&dv].constructors.clone();
                for o in others.iter().filter(|o| *o != c) {
                    let osig = self.env.cons[o].clone();
                    if let Some(or) = self.refine(&osig, &idx) {
                        let mut sigma = self.sigma.clone();
                        for (n, s) in &or.skolems {
                            sigma.push(n.clone(), *s);
                        }
                        let mut hs: Vec<S> = self.hyps.iter().map(|h| self.zonk(h)).collect();
                        hs.extend(or.hyps.iter().map(|h| self.zonk(h)));
                        if crate::statics::satisfiable(&sigma, &hs) {
                            return Err(err(
                                "nonexhaustive",
                                sp,
                                format!(
                                    "pattern `{}` does not cover constructor `{}` of `{}`",
                                    c, o, v
                                ),
                            )
                            .with_constraint(
                                crate::check::ctx::render_constraint(&sigma, &hs, &S::Bool(false)),
                            ));
                        }
                    }
                }
                if ps.len() != sig.args.len() {
                    return Err(err(
                        "arity",
                        sp,
                        format!(
                            "constructor `{}` takes {} proofs, pattern has {}",
                            c,
                            sig.args.len(),
                            ps.len()
                        ),
                    ));
                }
                for (n, s) in &r.skolems {
                    self.sigma.push(n.clone(), *s);
                }
                for h in r.hyps {
                    self.assume(h);
                }
                for (p, a) in ps.iter().zip(&sig.args) {
                    let av = a.subst(&r.sub);
                    self.bind_proof_pat(p, &av, persistent)?;
                }
                Ok(())
            }
        }
    }

    /// Lines a constructor's indices up with `idx`; `None` if a type index
    /// cannot match.
    pub(crate) fn refine(&self, sig: &ProofConSig, idx: &[S]) -> Option<Refinement> {
        let sorts = self.env.dataviews[&sig.dataview].sorts.clone();
        let binders: Vec<&Name> = sig.binders.iter().map(|(n, _)| n).collect();
        let mut sub: Vec<(Name, S)> = Vec::new();
        for (ci, si) in sig.indices().iter().zip(idx) {
            if let S::Var(b) = ci {
                if binders.contains(&b) && !sub.iter().any(|(n, _)| n == b) {
                    sub.push((b.clone(), self.zonk(si)));
                }
            }
        }
        let mut skolems = Vec::new();
        for (b, s) in &sig.binders {
            if !sub.iter().any(|(n, _)| n == b) {
                let k = fresh_name(b);
                skolems.push((k.clone(), *s));
                sub.push((b.clone(), S::Var(k)));
            }
        }
        let mut hyps = Vec::new();
        for ((ci, si), sort) in sig.indices().iter().zip(idx).zip(&sorts) {
            let ci = ci.subst(&sub);
            let si = self.zonk(si);
            if ci.alpha_eq(&si) {
                continue;
            }
            if sort.is_index() {
                hyps.push(S::eq(ci, si));
            } else {
                return None;
            }
        }
        hyps.extend(sig.guards.iter().map(|g| g.subst(&sub)));
        Some(Refinement { sub, skolems, hyps })
    }

    /// Wraps a synthesized type in existentials for skolems introduced
    /// since `sigma_mark`, keeping the hypotheses that mention them.
    pub(crate) fn pack(&self, t: S, sigma_mark: usize, hyps_mark: usize) -> S {
        let locals: Vec<(Name, Sort)> = self
            .sigma
            .iter()
            .skip(sigma_mark)
            .filter(|(n, _)| t.has_free(n))
            .cloned()
            .collect();
        if locals.is_empty() {
            return t;
        }
        let mut keep: Vec<S> = Vec::new();
        let mut mentioned: Vec<Name> = locals.iter().map(|(n, _)| n.clone()).collect();
        // hypotheses mentioning a packed variable, closed under sharing
        let hyps: Vec<S> = self.hyps[hyps_mark.min(self.hyps.len())..]
            .iter()
            .map(|h| self.zonk(h))
            .collect();
        let mut changed = true;
        let mut used = vec![false; hyps.len()];
        while changed {
            changed = false;
            for (i, h) in hyps.iter().enumerate() {
                if !used[i] && mentioned.iter().any(|n| h.has_free(n)) {
                    used[i] = true;
                    changed = true;
                    keep.push(h.clone());
                    for v in h.free_vars() {
                        let local = self.sigma.iter().skip(sigma_mark).any(|(n, _)| *n == v);
                        if local && !mentioned.contains(&v) {
                            mentioned.push(v);
                        }
                    }
                }
            }
        }
        let binders: Vec<(Name, Sort)> = self
            .sigma
            .iter()
            .skip(sigma_mark)
            .filter(|(n, _)| mentioned.contains(n))
            .cloned()
            .collect();
        S::exists_all(&binders, keep, t)
    }
}
