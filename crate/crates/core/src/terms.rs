//! Elaborated terms. Proofs and dynamic terms are separate syntactic
//! classes; static annotations are resolved. Runtime-only forms (`Loc`,
//! `Closure`, `Frame`) appear only during evaluation.

use std::fmt;
use std::rc::Rc;

use crate::decls::FunSig;
use crate::diag::Span;
use crate::statics::{Name, StaticTerm as S};
use crate::syntax::ast::{self, BinOp, Expr, ExprKind, LocalDecl, Pat, PatKind};

#[derive(Clone, Debug, PartialEq)]
pub struct ProofTerm {
    pub kind: ProofKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProofKind {
    Var(Name),
    /// Proof of `ty @ l_n` held by the store.
    Loc(u64, S),
    /// `'()` for no components, otherwise a tensor introduction.
    Tuple(Vec<ProofTerm>),
    Con(Name, Vec<ProofTerm>),
    Call {
        func: Name,
        statics: Option<Vec<S>>,
        args: Vec<ProofTerm>,
    },
    Lam {
        param: Name,
        view: Option<S>,
        body: Box<ProofTerm>,
    },
    App(Box<ProofTerm>, Box<ProofTerm>),
    Let(Vec<ProofDecl>, Box<ProofTerm>),
    Sif(S, Box<ProofTerm>, Box<ProofTerm>),
    Ann(Box<ProofTerm>, S),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProofDecl {
    Val {
        pat: ProofPat,
        rhs: ProofTerm,
        span: Span,
    },
    Fun(Rc<FunDef>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofPat {
    pub kind: ProofPatKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProofPatKind {
    Wild,
    Var(Name),
    Tuple(Vec<ProofPat>),
    Con(Name, Vec<ProofPat>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynTerm {
    pub kind: DynKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LamParam {
    pub name: Name,
    pub ty: Option<S>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DynKind {
    Var(Name),
    Int(i64),
    Bool(bool),
    Null,
    /// Pointer value `l_n`.
    Loc(u64),
    /// `proofs` is `None` for a bar-less tuple.
    Tuple {
        proofs: Option<Vec<ProofTerm>>,
        items: Vec<DynTerm>,
    },
    /// Call of a named function (global, local, or built-in).
    Call {
        func: Name,
        statics: Option<Vec<S>>,
        inv: Vec<ProofTerm>,
        proofs: Vec<ProofTerm>,
        args: Vec<DynTerm>,
        infix: bool,
    },
    /// Application of a function-valued term.
    App {
        func: Box<DynTerm>,
        proofs: Vec<ProofTerm>,
        args: Vec<DynTerm>,
    },
    BinOp(BinOp, Box<DynTerm>, Box<DynTerm>),
    If(Box<DynTerm>, Box<DynTerm>, Box<DynTerm>),
    Sif(S, Box<DynTerm>, Box<DynTerm>),
    Let(Vec<DynDecl>, Box<DynTerm>),
    Lam {
        once: bool,
        proofs: Vec<LamParam>,
        params: Vec<LamParam>,
        body: Box<DynTerm>,
    },
    Fix {
        name: Name,
        params: Vec<LamParam>,
        ret: Option<S>,
        body: Box<DynTerm>,
    },
    Ann(Box<DynTerm>, S),
    /// A top-level function used as a value.
    FunRef(Name),
    /// A local function whose enclosing statics are instantiated.
    Closure(Rc<FunDef>),
    /// An unfolded call, checked against the callee's result.
    Frame {
        ret: S,
        body: Box<DynTerm>,
    },
    /// Returns borrowed invariant proofs to their boxes: `drop[i]` removes
    /// proof component `i` of the body's result.
    Release {
        drop: Vec<bool>,
        body: Box<DynTerm>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DynDecl {
    Val {
        pat: DynPat,
        rhs: DynTerm,
        span: Span,
    },
    PrVal {
        pat: ProofPat,
        rhs: ProofTerm,
        span: Span,
    },
    Fun(Rc<FunDef>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynPat {
    pub kind: DynPatKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DynPatKind {
    Wild,
    Var(Name),
    Tuple {
        proofs: Option<Vec<ProofPat>>,
        items: Vec<DynPat>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunBody {
    Proof(ProofTerm),
    Dyn(DynTerm),
    Extern,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    pub sig: FunSig,
    pub body: FunBody,
    pub span: Span,
}

impl ProofTerm {
    pub fn new(kind: ProofKind, span: Span) -> Self {
        ProofTerm { kind, span }
    }

    pub fn is_value(&self) -> bool {
        match &self.kind {
            ProofKind::Loc(..) | ProofKind::Lam { .. } => true,
            ProofKind::Tuple(xs) | ProofKind::Con(_, xs) => xs.iter().all(|x| x.is_value()),
            ProofKind::Call { func, args, .. } => {
                func == "viewbox" && args.iter().all(|x| x.is_value())
            }
            _ => false,
        }
    }
}

impl DynTerm {
    pub fn new(kind: DynKind, span: Span) -> Self {
        DynTerm { kind, span }
    }

    pub fn unit(span: Span) -> Self {
        DynTerm::new(
            DynKind::Tuple {
                proofs: None,
                items: vec![],
            },
            span,
        )
    }

    pub fn is_value(&self) -> bool {
        match &self.kind {
            DynKind::Int(_)
            | DynKind::Bool(_)
            | DynKind::Null
            | DynKind::Loc(_)
            | DynKind::Lam { .. }
            | DynKind::Fix { .. }
            | DynKind::FunRef(_)
            | DynKind::Closure(_) => true,
            DynKind::Tuple { proofs, items } => {
                proofs.iter().flatten().all(|p| p.is_value()) && items.iter().all(|x| x.is_value())
            }
            _ => false,
        }
    }
}

/// A substitution applied to a term: dynamic variables, proof variables
/// and static variables, all replaced by closed terms.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    pub dyns: Vec<(Name, DynTerm)>,
    pub proofs: Vec<(Name, ProofTerm)>,
    pub statics: Vec<(Name, S)>,
}

impl Subst {
    pub fn is_empty(&self) -> bool {
        self.dyns.is_empty() && self.proofs.is_empty() && self.statics.is_empty()
    }

    fn without_dyn(&self, names: &[&str]) -> Subst {
        let mut s = self.clone();
        s.dyns.retain(|(n, _)| !names.contains(&n.as_str()));
        s.proofs.retain(|(n, _)| !names.contains(&n.as_str()));
        s
    }

    fn lookup_dyn(&self, n: &str) -> Option<&DynTerm> {
        self.dyns.iter().rev().find(|(k, _)| k == n).map(|(_, v)| v)
    }

    fn lookup_proof(&self, n: &str) -> Option<&ProofTerm> {
        self.proofs
            .iter()
            .rev()
            .find(|(k, _)| k == n)
            .map(|(_, v)| v)
    }

    fn st(&self, t: &S) -> S {
        t.subst(&self.statics)
    }

    fn st_opt(&self, t: &Option<S>) -> Option<S> {
        t.as_ref().map(|t| self.st(t))
    }

    pub fn sig(&self, sig: &FunSig) -> FunSig {
        if self.statics.is_empty() {
            return sig.clone();
        }
        let bound: Vec<Name> = sig.binders().into_iter().map(|(n, _)| n).collect();
        let sub: Vec<(Name, S)> = self
            .statics
            .iter()
            .filter(|(n, _)| !bound.contains(n))
            .cloned()
            .collect();
        let st = |t: &S| t.subst(&sub);
        let params = |ps: &[crate::decls::ParamSig]| {
            ps.iter()
                .map(|p| crate::decls::ParamSig {
                    ty: st(&p.ty),
                    ..p.clone()
                })
                .collect()
        };
        FunSig {
            quants: sig
                .quants
                .iter()
                .map(|q| match q {
                    crate::decls::Quant::Guard(b) => crate::decls::Quant::Guard(st(b)),
                    b => b.clone(),
                })
                .collect(),
            metric: sig.metric.as_ref().map(|m| m.iter().map(st).collect()),
            inv: params(&sig.inv),
            proofs: params(&sig.proofs),
            args: params(&sig.args),
            ret: st(&sig.ret),
            ..sig.clone()
        }
    }

    pub fn fundef(&self, f: &FunDef) -> FunDef {
        let sig = self.sig(&f.sig);
        let mut bound: Vec<&str> = vec![f.sig.name.as_str()];
        for p in f.sig.inv.iter().chain(&f.sig.proofs).chain(&f.sig.args) {
            bound.push(&p.name);
        }
        let mut inner = self.without_dyn(&bound);
        let qs: Vec<Name> = f.sig.binders().into_iter().map(|(n, _)| n).collect();
        inner.statics.retain(|(n, _)| !qs.contains(n));
        let body = match &f.body {
            FunBody::Proof(p) => FunBody::Proof(inner.proof(p)),
            FunBody::Dyn(d) => FunBody::Dyn(inner.dyn_term(d)),
            FunBody::Extern => FunBody::Extern,
        };
        FunDef {
            sig,
            body,
            span: f.span,
        }
    }

    pub fn proof(&self, p: &ProofTerm) -> ProofTerm {
        if self.is_empty() {
            return p.clone();
        }
        let kind = match &p.kind {
            ProofKind::Var(n) => match self.lookup_proof(n) {
                Some(v) => return v.clone(),
                None => ProofKind::Var(n.clone()),
            },
            ProofKind::Loc(l, t) => ProofKind::Loc(*l, self.st(t)),
            ProofKind::Tuple(xs) => ProofKind::Tuple(xs.iter().map(|x| self.proof(x)).collect()),
            ProofKind::Con(c, xs) => {
                ProofKind::Con(c.clone(), xs.iter().map(|x| self.proof(x)).collect())
            }
            ProofKind::Call {
                func,
                statics,
                args,
            } => {
                let args = args.iter().map(|x| self.proof(x)).collect();
                let statics = statics
                    .as_ref()
                    .map(|s| s.iter().map(|t| self.st(t)).collect());
                match self.lookup_proof(func) {
                    // a proof-function variable being substituted by a value
                    Some(f) => {
                        let mut acc = f.clone();
                        for a in args {
                            acc =
                                ProofTerm::new(ProofKind::App(Box::new(acc), Box::new(a)), p.span);
                        }
                        return acc;
                    }
                    None => ProofKind::Call {
                        func: func.clone(),
                        statics,
                        args,
                    },
                }
            }
            ProofKind::Lam { param, view, body } => ProofKind::Lam {
                param: param.clone(),
                view: self.st_opt(view),
                body: Box::new(self.without_dyn(&[param]).proof(body)),
            },
            ProofKind::App(f, a) => {
                ProofKind::App(Box::new(self.proof(f)), Box::new(self.proof(a)))
            }
            ProofKind::Let(ds, body) => {
                let mut cur = self.clone();
                let mut out = Vec::new();
                for d in ds {
                    match d {
                        ProofDecl::Val { pat, rhs, span } => {
                            out.push(ProofDecl::Val {
                                pat: pat.clone(),
                                rhs: cur.proof(rhs),
                                span: *span,
                            });
                            let names = pat.bound_names();
                            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                            cur = cur.without_dyn(&refs);
                        }
                        ProofDecl::Fun(f) => {
                            let inner = cur.without_dyn(&[&f.sig.name]);
                            out.push(ProofDecl::Fun(Rc::new(inner.fundef(f))));
                            cur = inner;
                        }
                    }
                }
                ProofKind::Let(out, Box::new(cur.proof(body)))
            }
            ProofKind::Sif(b, x, y) => {
                ProofKind::Sif(self.st(b), Box::new(self.proof(x)), Box::new(self.proof(y)))
            }
            ProofKind::Ann(x, t) => ProofKind::Ann(Box::new(self.proof(x)), self.st(t)),
        };
        ProofTerm::new(kind, p.span)
    }

    pub fn dyn_term(&self, d: &DynTerm) -> DynTerm {
        if self.is_empty() {
            return d.clone();
        }
        let b = |x: &DynTerm| Box::new(self.dyn_term(x));
        let ps = |xs: &[ProofTerm]| xs.iter().map(|x| self.proof(x)).collect::<Vec<_>>();
        let ds = |xs: &[DynTerm]| xs.iter().map(|x| self.dyn_term(x)).collect::<Vec<_>>();
        let lp = |xs: &[LamParam]| {
            xs.iter()
                .map(|p| LamParam {
                    ty: self.st_opt(&p.ty),
                    ..p.clone()
                })
                .collect::<Vec<_>>()
        };
        let kind = match &d.kind {
            DynKind::Var(n) => match self.lookup_dyn(n) {
                Some(v) => return v.clone(),
                None => DynKind::Var(n.clone()),
            },
            DynKind::Int(_)
            | DynKind::Bool(_)
            | DynKind::Null
            | DynKind::Loc(_)
            | DynKind::FunRef(_) => d.kind.clone(),
            DynKind::Tuple { proofs, items } => DynKind::Tuple {
                proofs: proofs.as_ref().map(|p| ps(p)),
                items: ds(items),
            },
            DynKind::Call {
                func,
                statics,
                inv,
                proofs,
                args,
                infix,
            } => {
                let statics = statics
                    .as_ref()
                    .map(|s| s.iter().map(|t| self.st(t)).collect());
                let (inv, proofs, args) = (ps(inv), ps(proofs), ds(args));
                match self.lookup_dyn(func) {
                    Some(f) => {
                        let mut all = inv;
                        all.extend(proofs);
                        DynKind::App {
                            func: Box::new(f.clone()),
                            proofs: all,
                            args,
                        }
                    }
                    None => DynKind::Call {
                        func: func.clone(),
                        statics,
                        inv,
                        proofs,
                        args,
                        infix: *infix,
                    },
                }
            }
            DynKind::App { func, proofs, args } => DynKind::App {
                func: b(func),
                proofs: ps(proofs),
                args: ds(args),
            },
            DynKind::BinOp(op, x, y) => DynKind::BinOp(*op, b(x), b(y)),
            DynKind::If(c, x, y) => DynKind::If(b(c), b(x), b(y)),
            DynKind::Sif(s, x, y) => DynKind::Sif(self.st(s), b(x), b(y)),
            DynKind::Let(decls, body) => {
                let mut cur = self.clone();
                let mut out = Vec::new();
                for dcl in decls {
                    match dcl {
                        DynDecl::Val { pat, rhs, span } => {
                            out.push(DynDecl::Val {
                                pat: pat.clone(),
                                rhs: cur.dyn_term(rhs),
                                span: *span,
                            });
                            let names = pat.bound_names();
                            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                            cur = cur.without_dyn(&refs);
                        }
                        DynDecl::PrVal { pat, rhs, span } => {
                            out.push(DynDecl::PrVal {
                                pat: pat.clone(),
                                rhs: cur.proof(rhs),
                                span: *span,
                            });
                            let names = pat.bound_names();
                            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                            cur = cur.without_dyn(&refs);
                        }
                        DynDecl::Fun(f) => {
                            let inner = cur.without_dyn(&[&f.sig.name]);
                            out.push(DynDecl::Fun(Rc::new(inner.fundef(f))));
                            cur = inner;
                        }
                    }
                }
                DynKind::Let(out, Box::new(cur.dyn_term(body)))
            }
            DynKind::Lam {
                once,
                proofs,
                params,
                body,
            } => {
                let names: Vec<&str> = proofs
                    .iter()
                    .chain(params)
                    .map(|p| p.name.as_str())
                    .collect();
                DynKind::Lam {
                    once: *once,
                    proofs: lp(proofs),
                    params: lp(params),
                    body: Box::new(self.without_dyn(&names).dyn_term(body)),
                }
            }
            DynKind::Fix {
                name,
                params,
                ret,
                body,
            } => {
                let mut names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
                names.push(name);
                DynKind::Fix {
                    name: name.clone(),
                    params: lp(params),
                    ret: self.st_opt(ret),
                    body: Box::new(self.without_dyn(&names).dyn_term(body)),
                }
            }
            DynKind::Ann(x, t) => DynKind::Ann(b(x), self.st(t)),
            DynKind::Closure(f) => DynKind::Closure(Rc::new(self.fundef(f))),
            DynKind::Frame { ret, body } => DynKind::Frame {
                ret: self.st(ret),
                body: b(body),
            },
            DynKind::Release { drop, body } => DynKind::Release {
                drop: drop.clone(),
                body: b(body),
            },
        };
        DynTerm::new(kind, d.span)
    }
}

impl ProofPat {
    pub fn bound_names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        fn go(p: &ProofPat, out: &mut Vec<Name>) {
            match &p.kind {
                ProofPatKind::Wild => {}
                ProofPatKind::Var(n) => out.push(n.clone()),
                ProofPatKind::Tuple(xs) | ProofPatKind::Con(_, xs) => {
                    xs.iter().for_each(|x| go(x, out))
                }
            }
        }
        go(self, &mut out);
        out
    }
}

impl DynPat {
    pub fn bound_names(&self) -> Vec<Name> {
        match &self.kind {
            DynPatKind::Wild => vec![],
            DynPatKind::Var(n) => vec![n.clone()],
            DynPatKind::Tuple { proofs, items } => proofs
                .iter()
                .flatten()
                .flat_map(|p| p.bound_names())
                .chain(items.iter().flat_map(|x| x.bound_names()))
                .collect(),
        }
    }
}

// Conversion back to surface syntax, for printing.

fn loc_name(l: u64) -> String {
    if l == 0 {
        "null".into()
    } else {
        format!("l_{}", l)
    }
}

impl ProofPat {
    pub fn to_pat(&self) -> Pat {
        let kind = match &self.kind {
            ProofPatKind::Wild => PatKind::Wild,
            ProofPatKind::Var(n) => PatKind::Var(n.clone()),
            ProofPatKind::Tuple(xs) => PatKind::Tuple {
                proofs: None,
                items: xs.iter().map(|x| x.to_pat()).collect(),
            },
            ProofPatKind::Con(c, xs) => {
                PatKind::Con(c.clone(), xs.iter().map(|x| x.to_pat()).collect())
            }
        };
        Pat {
            kind,
            span: self.span,
        }
    }
}

impl DynPat {
    pub fn to_pat(&self) -> Pat {
        let kind = match &self.kind {
            DynPatKind::Wild => PatKind::Wild,
            DynPatKind::Var(n) => PatKind::Var(n.clone()),
            DynPatKind::Tuple { proofs, items } => PatKind::Tuple {
                proofs: proofs
                    .as_ref()
                    .map(|p| p.iter().map(|x| x.to_pat()).collect()),
                items: items.iter().map(|x| x.to_pat()).collect(),
            },
        };
        Pat {
            kind,
            span: self.span,
        }
    }
}

fn to_params(ps: &[LamParam]) -> Vec<ast::Param> {
    ps.iter()
        .map(|p| ast::Param {
            name: p.name.clone(),
            ty: p.ty.clone(),
            span: p.span,
        })
        .collect()
}

/// A surface declaration for a (possibly runtime) function definition.
pub fn fundef_to_decl(f: &FunDef) -> ast::FunDecl {
    let sig = &f.sig;
    let mut quants = Vec::new();
    let mut cur = ast::QuantGroup {
        binders: vec![],
        guards: vec![],
    };
    for q in &sig.quants {
        match q {
            crate::decls::Quant::Bind(n, s) => {
                if !cur.guards.is_empty() {
                    quants.push(std::mem::replace(
                        &mut cur,
                        ast::QuantGroup {
                            binders: vec![],
                            guards: vec![],
                        },
                    ));
                }
                cur.binders.push((n.clone(), *s));
            }
            crate::decls::Quant::Guard(b) => cur.guards.push(b.clone()),
        }
    }
    if !cur.binders.is_empty() || !cur.guards.is_empty() {
        quants.push(cur);
    }
    let group = |ps: &[crate::decls::ParamSig]| {
        ps.iter()
            .map(|p| ast::Param {
                name: p.name.clone(),
                ty: Some(p.ty.clone()),
                span: p.span,
            })
            .collect::<Vec<_>>()
    };
    let params = match sig.kind {
        ast::FunKind::PrFun => vec![group(&sig.proofs)],
        ast::FunKind::Fun if !sig.inv.is_empty() => {
            vec![group(&sig.inv), group(&sig.proofs), group(&sig.args)]
        }
        ast::FunKind::Fun if !sig.proofs.is_empty() => vec![group(&sig.proofs), group(&sig.args)],
        ast::FunKind::Fun => vec![group(&sig.args)],
    };
    ast::FunDecl {
        kind: sig.kind,
        is_extern: matches!(f.body, FunBody::Extern),
        name: sig.name.clone(),
        quants,
        metric: sig.metric.clone(),
        params,
        ret: Some(sig.ret.clone()),
        body: match &f.body {
            FunBody::Proof(p) => Some(p.to_expr()),
            FunBody::Dyn(d) => Some(d.to_expr()),
            FunBody::Extern => None,
        },
        span: f.span,
    }
}

impl ProofTerm {
    pub fn to_expr(&self) -> Expr {
        let sp = self.span;
        let e = |k| Expr::new(k, sp);
        match &self.kind {
            ProofKind::Var(n) => e(ExprKind::Var(n.clone())),
            ProofKind::Loc(l, _) => e(ExprKind::Var(format!("pf_{}", loc_name(*l)))),
            ProofKind::Tuple(xs) => e(ExprKind::Tuple {
                proofs: None,
                items: xs.iter().map(|x| x.to_expr()).collect(),
            }),
            ProofKind::Con(c, xs) => e(ExprKind::Call {
                func: c.clone(),
                statics: None,
                groups: vec![xs.iter().map(|x| x.to_expr()).collect()],
                infix: false,
            }),
            ProofKind::Call {
                func,
                statics,
                args,
            } => e(ExprKind::Call {
                func: func.clone(),
                statics: statics.clone(),
                groups: vec![args.iter().map(|x| x.to_expr()).collect()],
                infix: false,
            }),
            ProofKind::Lam { param, view, body } => e(ExprKind::Lam {
                once: true,
                params: vec![ast::Param {
                    name: param.clone(),
                    ty: view.clone(),
                    span: sp,
                }],
                body: Box::new(body.to_expr()),
            }),
            ProofKind::App(f, a) => match f.to_expr().kind {
                ExprKind::Var(n) => e(ExprKind::Call {
                    func: n,
                    statics: None,
                    groups: vec![vec![a.to_expr()]],
                    infix: false,
                }),
                _ => e(ExprKind::Call {
                    func: "papp".into(),
                    statics: None,
                    groups: vec![vec![f.to_expr(), a.to_expr()]],
                    infix: false,
                }),
            },
            ProofKind::Let(ds, body) => e(ExprKind::Let(
                ds.iter()
                    .map(|d| match d {
                        ProofDecl::Val { pat, rhs, span } => LocalDecl::PrVal {
                            pat: pat.to_pat(),
                            rhs: rhs.to_expr(),
                            span: *span,
                        },
                        ProofDecl::Fun(f) => LocalDecl::Fun(fundef_to_decl(f)),
                    })
                    .collect(),
                Box::new(body.to_expr()),
            )),
            ProofKind::Sif(b, x, y) => e(ExprKind::Sif(
                b.clone(),
                Box::new(x.to_expr()),
                Box::new(y.to_expr()),
            )),
            ProofKind::Ann(x, t) => e(ExprKind::Ann(Box::new(x.to_expr()), t.clone())),
        }
    }
}

impl DynTerm {
    pub fn to_expr(&self) -> Expr {
        let sp = self.span;
        let e = |k| Expr::new(k, sp);
        let ps = |xs: &[ProofTerm]| xs.iter().map(|x| x.to_expr()).collect::<Vec<_>>();
        let ds = |xs: &[DynTerm]| xs.iter().map(|x| x.to_expr()).collect::<Vec<_>>();
        match &self.kind {
            DynKind::Var(n) | DynKind::FunRef(n) => e(ExprKind::Var(n.clone())),
            DynKind::Int(i) => e(ExprKind::Int(*i)),
            DynKind::Bool(b) => e(ExprKind::Bool(*b)),
            DynKind::Null => e(ExprKind::Null),
            DynKind::Loc(0) => e(ExprKind::Null),
            DynKind::Loc(l) => e(ExprKind::Var(loc_name(*l))),
            DynKind::Tuple { proofs, items } => e(ExprKind::Tuple {
                proofs: proofs.as_ref().map(|p| ps(p)),
                items: ds(items),
            }),
            DynKind::Call {
                func,
                statics,
                inv,
                proofs,
                args,
                infix,
            } => {
                let mut groups = Vec::new();
                if !inv.is_empty() {
                    groups.push(ps(inv));
                    groups.push(ps(proofs));
                } else if !proofs.is_empty() {
                    groups.push(ps(proofs));
                }
                groups.push(ds(args));
                e(ExprKind::Call {
                    func: func.clone(),
                    statics: statics.clone(),
                    groups,
                    infix: *infix,
                })
            }
            DynKind::App { func, proofs, args } => {
                let mut groups = Vec::new();
                if !proofs.is_empty() {
                    groups.push(ps(proofs));
                }
                groups.push(ds(args));
                let name = match &func.kind {
                    DynKind::Var(n) | DynKind::FunRef(n) => n.clone(),
                    DynKind::Closure(f) => f.sig.name.clone(),
                    DynKind::Fix { name, .. } => name.clone(),
                    _ => "lam".into(),
                };
                e(ExprKind::Call {
                    func: name,
                    statics: None,
                    groups,
                    infix: false,
                })
            }
            DynKind::BinOp(op, a, b) => e(ExprKind::BinOp(
                *op,
                Box::new(a.to_expr()),
                Box::new(b.to_expr()),
            )),
            DynKind::If(c, a, b) => e(ExprKind::If(
                Box::new(c.to_expr()),
                Box::new(a.to_expr()),
                Box::new(b.to_expr()),
            )),
            DynKind::Sif(s, a, b) => e(ExprKind::Sif(
                s.clone(),
                Box::new(a.to_expr()),
                Box::new(b.to_expr()),
            )),
            DynKind::Let(decls, body) => e(ExprKind::Let(
                decls
                    .iter()
                    .map(|d| match d {
                        DynDecl::Val { pat, rhs, span } => LocalDecl::Val {
                            pat: pat.to_pat(),
                            rhs: rhs.to_expr(),
                            span: *span,
                        },
                        DynDecl::PrVal { pat, rhs, span } => LocalDecl::PrVal {
                            pat: pat.to_pat(),
                            rhs: rhs.to_expr(),
                            span: *span,
                        },
                        DynDecl::Fun(f) => LocalDecl::Fun(fundef_to_decl(f)),
                    })
                    .collect(),
                Box::new(body.to_expr()),
            )),
            DynKind::Lam {
                once,
                proofs,
                params,
                body,
            } => {
                let mut all = to_params(proofs);
                all.extend(to_params(params));
                e(ExprKind::Lam {
                    once: *once,
                    params: all,
                    body: Box::new(body.to_expr()),
                })
            }
            DynKind::Fix {
                name,
                params,
                ret,
                body,
            } => e(ExprKind::Fix {
                name: name.clone(),
                params: to_params(params),
                ret: ret.clone(),
                body: Box::new(body.to_expr()),
            }),
            DynKind::Ann(x, t) => e(ExprKind::Ann(Box::new(x.to_expr()), t.clone())),
            DynKind::Closure(f) => e(ExprKind::Var(f.sig.name.clone())),
            DynKind::Frame { ret, body } => e(ExprKind::Ann(Box::new(body.to_expr()), ret.clone())),
            DynKind::Release { body, .. } => body.to_expr(),
        }
    }
}

impl fmt::Display for DynTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::pretty_expr(&self.to_expr()))
    }
}

impl fmt::Display for ProofTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::pretty_expr(&self.to_expr()))
    }
}

/// Calls `f` on every dynamic subterm, children first, including the
/// bodies of local functions.
pub fn visit_dyn_mut(t: &mut DynTerm, f: &mut dyn FnMut(&mut DynTerm)) {
    match &mut t.kind {
        DynKind::Tuple { items, .. } | DynKind::Call { args: items, .. } => {
            items.iter_mut().for_each(|x| visit_dyn_mut(x, f))
        }
        DynKind::App { func, args, .. } => {
            visit_dyn_mut(func, f);
            args.iter_mut().for_each(|x| visit_dyn_mut(x, f));
        }
        DynKind::BinOp(_, a, b) | DynKind::Sif(_, a, b) => {
            visit_dyn_mut(a, f);
            visit_dyn_mut(b, f);
        }
        DynKind::If(c, a, b) => {
            visit_dyn_mut(c, f);
            visit_dyn_mut(a, f);
            visit_dyn_mut(b, f);
        }
        DynKind::Let(ds, body) => {
            for d in ds {
                match d {
                    DynDecl::Val { rhs, .. } => visit_dyn_mut(rhs, f),
                    DynDecl::Fun(def) => visit_fundef_mut(Rc::make_mut(def), f),
                    DynDecl::PrVal { .. } => {}
                }
            }
            visit_dyn_mut(body, f);
        }
        DynKind::Lam { body, .. }
        | DynKind::Fix { body, .. }
        | DynKind::Ann(body, _)
        | DynKind::Frame { body, .. }
        | DynKind::Release { body, .. } => visit_dyn_mut(body, f),
        DynKind::Closure(def) => visit_fundef_mut(Rc::make_mut(def), f),
        _ => {}
    }
    f(t);
}

pub fn visit_fundef_mut(def: &mut FunDef, f: &mut dyn FnMut(&mut DynTerm)) {
    if let FunBody::Dyn(b) = &mut def.body {
        visit_dyn_mut(b, f);
    }
}
