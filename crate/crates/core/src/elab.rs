//! Classification of surface expressions into proofs and dynamic terms.
//!
//! The split is syntactic: `prval` right-hand sides, `prfun` bodies,
//! constructor arguments and the proof side of `|` are proofs. A call with
//! a single argument group is split by the shape of each argument.

use std::rc::Rc;

use crate::decls::{Env, FunSig};
use crate::diag::{Diagnostic, Span};
use crate::statics::{Name, Sort, SortCtx, StaticTerm as S};
use crate::syntax::ast::{self, Decl, Expr, ExprKind, FunDecl, FunKind, LocalDecl, Pat, PatKind};
use crate::terms::*;

#[derive(Clone, Debug)]
enum Binding {
    Dyn,
    Proof,
    Fun(Box<FunSig>),
}

/// An elaborated program.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub env: Env,
    pub funs: Vec<Rc<FunDef>>,
    pub main: Option<DynTerm>,
}

pub struct Elaborator<'a> {
    env: &'a Env,
    statics: SortCtx,
    scope: Vec<(Name, Binding)>,
}

fn err(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error("elab", span, msg)
}

type R<T> = Result<T, Diagnostic>;

/// Elaborates a parsed program against the prelude. Declarations are
/// processed in order; each error is reported once and later declarations
/// are still checked.
pub fn elaborate(prog: &ast::Program) -> (Elaborated, Vec<Diagnostic>) {
    let mut env = Env::with_prelude();
    let mut diags = Vec::new();
    let mut funs = Vec::new();
    let mut main = None;
    for d in &prog.decls {
        match d {
            Decl::Fun(f) => {
                let sig = match env.fun_sig(&SortCtx::new(), f) {
                    Ok(s) => s,
                    Err(e) => {
                        diags.push(e);
                        continue;
                    }
                };
                env.funs.insert(f.name.clone(), sig.clone());
                let mut el = Elaborator::new(&env);
                match el.fun_body(f, &sig) {
                    Ok(body) => funs.push(Rc::new(FunDef {
                        sig,
                        body,
                        span: f.span,
                    })),
                    Err(e) => diags.push(e),
                }
            }
            Decl::Main(e) => {
                if main.is_some() {
                    diags.push(err(e.span, "`main` is defined twice"));
                    continue;
                }
                let mut el = Elaborator::new(&env);
                match el.dyn_expr(e) {
                    Ok(t) => main = Some(t),
                    Err(e) => diags.push(e),
                }
            }
            other => {
                if let Err(e) = env.declare(other) {
                    diags.push(e);
                }
            }
        }
    }
    (Elaborated { env, funs, main }, diags)
}

impl<'a> Elaborator<'a> {
    pub fn new(env: &'a Env) -> Self {
        Elaborator {
            env,
            statics: SortCtx::new(),
            scope: Vec::new(),
        }
    }

    fn lookup(&self, n: &str) -> Option<&Binding> {
        self.scope
            .iter()
            .rev()
            .find(|(k, _)| k == n)
            .map(|(_, b)| b)
    }

    fn fun_sig_of(&self, n: &str) -> Option<FunSig> {
        match self.lookup(n) {
            Some(Binding::Fun(s)) => Some((**s).clone()),
            Some(_) => None,
            None => self.env.funs.get(n).cloned(),
        }
    }

    fn resolve(&mut self, t: &S, want: Option<Sort>, span: Span) -> R<S> {
        match want {
            Some(w) => self.env.resolve_sorted(&mut self.statics, t, w, span),
            None => {
                let r = self.env.resolve(&mut self.statics, t, None, span)?;
                crate::statics::sort_check(&mut self.statics, self.env, &r)
                    .map_err(|e| Diagnostic::error("sort", span, e.to_string()))?;
                Ok(r)
            }
        }
    }

    fn sort_of(&self, t: &S) -> Option<Sort> {
        crate::statics::sort_check(&mut self.statics.clone(), self.env, t).ok()
    }

    /// Elaborates a function body with its statics and parameters in scope.
    pub fn fun_body(&mut self, f: &FunDecl, sig: &FunSig) -> R<FunBody> {
        let (mark_s, mark_v) = (self.statics.len(), self.scope.len());
        for (n, s) in sig.binders() {
            self.statics.push(n, s);
        }
        // the function itself is in scope for recursive calls
        self.scope
            .push((sig.name.clone(), Binding::Fun(Box::new(sig.clone()))));
        for p in sig.inv.iter().chain(&sig.proofs) {
            self.scope.push((p.name.clone(), Binding::Proof));
        }
        for p in &sig.args {
            self.scope.push((p.name.clone(), Binding::Dyn));
        }
        let r = match (&f.body, f.kind) {
            (None, _) => Ok(FunBody::Extern),
            (Some(b), FunKind::PrFun) => self.proof_expr(b).map(FunBody::Proof),
            (Some(b), FunKind::Fun) => self.dyn_expr(b).map(FunBody::Dyn),
        };
        self.statics.truncate(mark_s);
        self.scope.truncate(mark_v);
        r
    }

    fn local_fun(&mut self, f: &FunDecl) -> R<Rc<FunDef>> {
        if f.is_extern {
            return Err(err(f.span, "local functions cannot be `extern`"));
        }
        let sig = self.env.fun_sig(&self.statics, f)?;
        let body = self.fun_body(f, &sig)?;
        Ok(Rc::new(FunDef {
            sig,
            body,
            span: f.span,
        }))
    }

    /// Could this argument of a one-group call be a proof?
    fn proof_like(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Var(n) => matches!(self.lookup(n), Some(Binding::Proof)),
            ExprKind::Call { func, .. } => {
                self.env.cons.contains_key(func)
                    || self
                        .fun_sig_of(func)
                        .is_some_and(|s| s.kind == FunKind::PrFun)
                    || matches!(self.lookup(func), Some(Binding::Proof))
            }
            ExprKind::Tuple {
                proofs: None,
                items,
            } => !items.is_empty() && items.iter().all(|x| self.proof_like(x)),
            ExprKind::Sif(_, a, _) => self.proof_like(a),
            ExprKind::Let(_, body) => self.proof_like(body),
            ExprKind::Ann(x, _) => self.proof_like(x),
            _ => false,
        }
    }

    fn proofs(&mut self, es: &[Expr]) -> R<Vec<ProofTerm>> {
        es.iter().map(|e| self.proof_expr(e)).collect()
    }

    fn dyns(&mut self, es: &[Expr]) -> R<Vec<DynTerm>> {
        es.iter().map(|e| self.dyn_expr(e)).collect()
    }

    fn statics_of(&mut self, st: &Option<Vec<S>>, span: Span) -> R<Option<Vec<S>>> {
        match st {
            None => Ok(None),
            Some(ts) => Ok(Some(
                ts.iter()
                    .map(|t| self.resolve(t, None, span))
                    .collect::<R<Vec<_>>>()?,
            )),
        }
    }

    /// Splits call argument groups into invariant, proof and dynamic parts.
    fn split_groups(
        &mut self,
        func: &str,
        groups: &[Vec<Expr>],
        span: Span,
    ) -> R<(Vec<ProofTerm>, Vec<ProofTerm>, Vec<DynTerm>)> {
        match groups.len() {
            1 => {
                let mut ps = Vec::new();
                let mut ds = Vec::new();
                for a in &groups[0] {
                    if self.proof_like(a) {
                        ps.push(self.proof_expr(a)?);
                    } else {
                        ds.push(self.dyn_expr(a)?);
                    }
                }
                Ok((vec![], ps, ds))
            }
            2 => Ok((vec![], self.proofs(&groups[0])?, self.dyns(&groups[1])?)),
            3 => Ok((
                self.proofs(&groups[0])?,
                self.proofs(&groups[1])?,
                self.dyns(&groups[2])?,
            )),
            0 => Ok((vec![], vec![], vec![])),
            n => Err(err(
                span,
                format!("call of `{}` has {} argument groups", func, n),
            )),
        }
    }

    pub fn dyn_expr(&mut self, e: &Expr) -> R<DynTerm> {
        let sp = e.span;
        let mk = |k| Ok(DynTerm::new(k, sp));
        match &e.kind {
            ExprKind::Var(n) => match self.lookup(n) {
                Some(Binding::Dyn) | Some(Binding::Fun(_)) => mk(DynKind::Var(n.clone())),
                Some(Binding::Proof) => Err(err(
                    sp,
                    format!("proof `{}` is used where a value is expected", n),
                )),
                None if self.env.funs.contains_key(n) => {
                    if self.env.funs[n].kind == FunKind::PrFun {
                        return Err(err(sp, format!("proof function `{}` used as a value", n)));
                    }
                    mk(DynKind::FunRef(n.clone()))
                }
                None if self.env.cons.contains_key(n) => Err(err(
                    sp,
                    format!(
                        "proof constructor `{}` is used where a value is expected",
                        n
                    ),
                )),
                None => Err(err(sp, format!("unbound variable `{}`", n))),
            },
            ExprKind::Int(i) => mk(DynKind::Int(*i)),
            ExprKind::Bool(b) => mk(DynKind::Bool(*b)),
            ExprKind::Null => mk(DynKind::Null),
            ExprKind::Tuple { proofs, items } => {
                let proofs = match proofs {
                    Some(ps) => Some(self.proofs(ps)?),
                    None => None,
                };
                let items = self.dyns(items)?;
                mk(DynKind::Tuple { proofs, items })
            }
            ExprKind::Call {
                func,
                statics,
                groups,
                infix,
            } => {
                if self.env.cons.contains_key(func) && self.lookup(func).is_none() {
                    return Err(err(
                        sp,
                        format!(
                            "proof constructor `{}` is used where a value is expected",
                            func
                        ),
                    ));
                }
                let statics = self.statics_of(statics, sp)?;
                if matches!(self.lookup(func), Some(Binding::Dyn)) {
                    let (inv, mut ps, ds) = self.split_groups(func, groups, sp)?;
                    let mut all = inv;
                    all.append(&mut ps);
                    return mk(DynKind::App {
                        func: Box::new(DynTerm::new(DynKind::Var(func.clone()), sp)),
                        proofs: all,
                        args: ds,
                    });
                }
                let Some(sig) = self.fun_sig_of(func) else {
                    return Err(err(sp, format!("unknown function `{}`", func)));
                };
                if sig.kind == FunKind::PrFun {
                    return Err(err(
                        sp,
                        format!(
                            "proof function `{}` is called where a value is expected",
                            func
                        ),
                    ));
                }
                let (inv, proofs, args) = self.split_groups(func, groups, sp)?;
                mk(DynKind::Call {
                    func: func.clone(),
                    statics,
                    inv,
                    proofs,
                    args,
                    infix: *infix,
                })
            }
            ExprKind::BinOp(op, a, b) => {
                let a = self.dyn_expr(a)?;
                let b = self.dyn_expr(b)?;
                mk(DynKind::BinOp(*op, Box::new(a), Box::new(b)))
            }
            ExprKind::If(c, a, b) => {
                let c = self.dyn_expr(c)?;
                let a = self.dyn_expr(a)?;
                let b = self.dyn_expr(b)?;
                mk(DynKind::If(Box::new(c), Box::new(a), Box::new(b)))
            }
            ExprKind::Sif(s, a, b) => {
                let s = self.resolve(s, Some(Sort::Bool), sp)?;
                let a = self.dyn_expr(a)?;
                let b = self.dyn_expr(b)?;
                mk(DynKind::Sif(s, Box::new(a), Box::new(b)))
            }
            ExprKind::Let(decls, body) => {
                let mark = self.scope.len();
                let r = self.dyn_let(decls, body, sp);
                self.scope.truncate(mark);
                r
            }
            ExprKind::Lam { once, params, body } => {
                let mut proofs = Vec::new();
                let mut dyns = Vec::new();
                let mark = self.scope.len();
                for p in params {
                    let ty = match &p.ty {
                        Some(t) => Some(self.resolve(t, None, p.span)?),
                        None => None,
                    };
                    let is_proof = ty.as_ref().and_then(|t| self.sort_of(t)) == Some(Sort::View);
                    let lp = LamParam {
                        name: p.name.clone(),
                        ty,
                        span: p.span,
                    };
                    if is_proof {
                        self.scope.push((p.name.clone(), Binding::Proof));
                        proofs.push(lp);
                    } else {
                        self.scope.push((p.name.clone(), Binding::Dyn));
                        dyns.push(lp);
                    }
                }
                let body = self.dyn_expr(body);
                self.scope.truncate(mark);
                mk(DynKind::Lam {
                    once: *once,
                    proofs,
                    params: dyns,
                    body: Box::new(body?),
                })
            }
            ExprKind::Fix {
                name,
                params,
                ret,
                body,
            } => {
                let mark = self.scope.len();
                self.scope.push((name.clone(), Binding::Dyn));
                let mut ps = Vec::new();
                for p in params {
                    let ty = match &p.ty {
                        Some(t) => Some(self.resolve(t, Some(Sort::ViewType), p.span)?),
                        None => None,
                    };
                    self.scope.push((p.name.clone(), Binding::Dyn));
                    ps.push(LamParam {
                        name: p.name.clone(),
                        ty,
                        span: p.span,
                    });
                }
                let ret = match ret {
                    Some(t) => Some(self.resolve(t, Some(Sort::ViewType), sp)?),
                    None => None,
                };
                let body = self.dyn_expr(body);
                self.scope.truncate(mark);
                mk(DynKind::Fix {
                    name: name.clone(),
                    params: ps,
                    ret,
                    body: Box::new(body?),
                })
            }
            ExprKind::Ann(x, t) => {
                let t = self.resolve(t, Some(Sort::ViewType), sp)?;
                let x = self.dyn_expr(x)?;
                mk(DynKind::Ann(Box::new(x), t))
            }
        }
    }

    fn dyn_let(&mut self, decls: &[LocalDecl], body: &Expr, sp: Span) -> R<DynTerm> {
        let mut out = Vec::new();
        for d in decls {
            match d {
                LocalDecl::Val { pat, rhs, span } => {
                    let rhs = self.dyn_expr(rhs)?;
                    let pat = self.dyn_pat(pat)?;
                    out.push(DynDecl::Val {
                        pat,
                        rhs,
                        span: *span,
                    });
                }
                LocalDecl::PrVal { pat, rhs, span } => {
                    let rhs = self.proof_expr(rhs)?;
                    let pat = self.proof_pat(pat)?;
                    out.push(DynDecl::PrVal {
                        pat,
                        rhs,
                        span: *span,
                    });
                }
                LocalDecl::Fun(f) => {
                    let def = self.local_fun(f)?;
                    self.scope
                        .push((f.name.clone(), Binding::Fun(Box::new(def.sig.clone()))));
                    out.push(DynDecl::Fun(def));
                }
            }
        }
        let body = self.dyn_expr(body)?;
        Ok(DynTerm::new(DynKind::Let(out, Box::new(body)), sp))
    }

    fn dyn_pat(&mut self, p: &Pat) -> R<DynPat> {
        let kind = match &p.kind {
            PatKind::Wild => DynPatKind::Wild,
            PatKind::Var(n) => {
                self.scope.push((n.clone(), Binding::Dyn));
                DynPatKind::Var(n.clone())
            }
            PatKind::Tuple { proofs, items } => {
                let proofs = match proofs {
                    Some(ps) => Some(
                        ps.iter()
                            .map(|x| self.proof_pat(x))
                            .collect::<R<Vec<_>>>()?,
                    ),
                    None => None,
                };
                let items = items
                    .iter()
                    .map(|x| self.dyn_pat(x))
                    .collect::<R<Vec<_>>>()?;
                DynPatKind::Tuple { proofs, items }
            }
            PatKind::Con(c, _) => {
                return Err(err(
                    p.span,
                    format!("constructor pattern `{}` must be bound with `prval`", c),
                ))
            }
        };
        Ok(DynPat { kind, span: p.span })
    }

    fn proof_pat(&mut self, p: &Pat) -> R<ProofPat> {
        let kind = match &p.kind {
            PatKind::Wild => ProofPatKind::Wild,
            PatKind::Var(n) => {
                self.scope.push((n.clone(), Binding::Proof));
                ProofPatKind::Var(n.clone())
            }
            PatKind::Tuple {
                proofs: None,
                items,
            } => ProofPatKind::Tuple(
                items
                    .iter()
                    .map(|x| self.proof_pat(x))
                    .collect::<R<Vec<_>>>()?,
            ),
            PatKind::Tuple { .. } => return Err(err(p.span, "a proof pattern cannot bind values")),
            PatKind::Con(c, args) => {
                if !self.env.cons.contains_key(c) {
                    return Err(err(p.span, format!("unknown proof constructor `{}`", c)));
                }
                ProofPatKind::Con(
                    c.clone(),
                    args.iter()
                        .map(|x| self.proof_pat(x))
                        .collect::<R<Vec<_>>>()?,
                )
            }
        };
        Ok(ProofPat { kind, span: p.span })
    }

    pub fn proof_expr(&mut self, e: &Expr) -> R<ProofTerm> {
        let sp = e.span;
        let mk = |k| Ok(ProofTerm::new(k, sp));
        match &e.kind {
            ExprKind::Var(n) => match self.lookup(n) {
                Some(Binding::Proof) => mk(ProofKind::Var(n.clone())),
                Some(_) => Err(err(sp, format!("`{}` is a value, not a proof", n))),
                None if self.env.cons.contains_key(n) => mk(ProofKind::Con(n.clone(), vec![])),
                None => Err(err(sp, format!("unbound proof variable `{}`", n))),
            },
            ExprKind::Tuple {
                proofs: None,
                items,
            } => mk(ProofKind::Tuple(self.proofs(items)?)),
            ExprKind::Tuple { .. } => Err(err(sp, "a proof tuple cannot hold values")),
            ExprKind::Call {
                func,
                statics,
                groups,
                ..
            } => {
                let args: Vec<Expr> = match groups.len() {
                    0 => vec![],
                    1 => groups[0].clone(),
                    _ => {
                        return Err(err(
                            sp,
                            format!("`{}` takes proofs only; drop the `|`", func),
                        ))
                    }
                };
                if matches!(self.lookup(func), Some(Binding::Proof)) {
                    let mut acc = ProofTerm::new(ProofKind::Var(func.clone()), sp);
                    for a in &args {
                        let a = self.proof_expr(a)?;
                        acc = ProofTerm::new(ProofKind::App(Box::new(acc), Box::new(a)), sp);
                    }
                    return Ok(acc);
                }
                if self.env.cons.contains_key(func) && self.lookup(func).is_none() {
                    if statics.is_some() {
                        return Err(err(sp, "constructors take no explicit static arguments"));
                    }
                    return mk(ProofKind::Con(func.clone(), self.proofs(&args)?));
                }
                match self.fun_sig_of(func) {
                    Some(sig) if sig.kind == FunKind::PrFun => {
                        let statics = self.statics_of(statics, sp)?;
                        mk(ProofKind::Call {
                            func: func.clone(),
                            statics,
                            args: self.proofs(&args)?,
                        })
                    }
                    Some(_) => Err(err(
                        sp,
                        format!("function `{}` is called inside a proof", func),
                    )),
                    None => Err(err(sp, format!("unknown proof function `{}`", func))),
                }
            }
            ExprKind::Let(decls, body) => {
                let mark = self.scope.len();
                let r = self.proof_let(decls, body, sp);
                self.scope.truncate(mark);
                r
            }
            ExprKind::Sif(s, a, b) => {
                let s = self.resolve(s, Some(Sort::Bool), sp)?;
                let a = self.proof_expr(a)?;
                let b = self.proof_expr(b)?;
                mk(ProofKind::Sif(s, Box::new(a), Box::new(b)))
            }
            ExprKind::Ann(x, t) => {
                let t = self.resolve(t, Some(Sort::View), sp)?;
                let x = self.proof_expr(x)?;
                mk(ProofKind::Ann(Box::new(x), t))
            }
            ExprKind::Lam { params, body, .. } => {
                if params.len() != 1 {
                    return Err(err(sp, "a proof function literal takes one proof"));
                }
                let p = &params[0];
                let view = match &p.ty {
                    Some(t) => Some(self.resolve(t, Some(Sort::View), p.span)?),
                    None => None,
                };
                let mark = self.scope.len();
                self.scope.push((p.name.clone(), Binding::Proof));
                let body = self.proof_expr(body);
                self.scope.truncate(mark);
                mk(ProofKind::Lam {
                    param: p.name.clone(),
                    view,
                    body: Box::new(body?),
                })
            }
            ExprKind::If(..) => Err(err(
                sp,
                "`if` tests a run-time value and cannot appear in a proof; use `sif`",
            )),
            _ => Err(err(sp, "a value is used where a proof is expected")),
        }
    }

    fn proof_let(&mut self, decls: &[LocalDecl], body: &Expr, sp: Span) -> R<ProofTerm> {
        let mut out = Vec::new();
        for d in decls {
            match d {
                LocalDecl::PrVal { pat, rhs, span } => {
                    let rhs = self.proof_expr(rhs)?;
                    let pat = self.proof_pat(pat)?;
                    out.push(ProofDecl::Val {
                        pat,
                        rhs,
                        span: *span,
                    });
                }
                LocalDecl::Val { span, .. } => {
                    return Err(err(*span, "`val` binds a value; proofs use `prval`"))
                }
                LocalDecl::Fun(f) => {
                    if f.kind != FunKind::PrFun {
                        return Err(err(f.span, "only proof functions may be local to a proof"));
                    }
                    let def = self.local_fun(f)?;
                    self.scope
                        .push((f.name.clone(), Binding::Fun(Box::new(def.sig.clone()))));
                    out.push(ProofDecl::Fun(def));
                }
            }
        }
        let body = self.proof_expr(body)?;
        Ok(ProofTerm::new(ProofKind::Let(out, Box::new(body)), sp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn elab(src: &str) -> (Elaborated, Vec<Diagnostic>) {
        elaborate(&parse_program(src).unwrap())
    }

    #[test]
    fn prval_and_val_split() {
        let (el, d) = elab(
            "fun f {a:type, l:addr} (pf: a @ l | p: ptr l): '(a @ l | a) =
               let val '(pf | x) = getPtr (pf | p) in '(pf | x) end",
        );
        assert!(d.is_empty(), "{:?}", d);
        let FunBody::Dyn(b) = &el.funs[0].body else {
            panic!()
        };
        let DynKind::Let(ds, _) = &b.kind else {
            panic!()
        };
        assert!(matches!(&ds[0], DynDecl::Val { .. }));
    }

    #[test]
    fn one_group_call_splits_by_shape() {
        let (el, d) =
            elab("fun f {a:type, l:addr} (pf: a @ l, p: ptr l): '(a @ l | a) = getPtr (pf, p)");
        assert!(d.is_empty(), "{:?}", d);
        let FunBody::Dyn(b) = &el.funs[0].body else {
            panic!()
        };
        let DynKind::Call { proofs, args, .. } = &b.kind else {
            panic!()
        };
        assert_eq!((proofs.len(), args.len()), (1, 1));
        assert_eq!(el.funs[0].sig.proofs.len(), 1);
    }

    #[test]
    fn if_in_proof_is_rejected() {
        let (_, d) = elab("prfun f {l:addr} (pf: int @ l): int @ l = if true then pf else pf");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("sif"));
    }

    #[test]
    fn proof_as_value_is_rejected() {
        let (_, d) = elab("fun f {l:addr} (pf: int @ l | p: ptr l): ptr l = pf");
        assert_eq!(d.len(), 1);
    }
}
