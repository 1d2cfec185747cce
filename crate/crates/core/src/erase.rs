//! Proof erasure: removes proofs, proof bindings, static arguments and type
//! annotations, leaving a program over plain values.

use std::rc::Rc;

use crate::decls::FunSig;
use crate::elab::Elaborated;
use crate::syntax::ast::{self, Decl, FunKind};
use crate::syntax::pretty_decl;
use crate::terms::{DynDecl, DynKind, DynPat, DynPatKind, DynTerm, FunBody, FunDef, LamParam};

/// An erased program. Only dynamic functions survive.
#[derive(Clone, Debug)]
pub struct ErasedProgram {
    pub funs: Vec<Rc<FunDef>>,
    pub main: Option<DynTerm>,
}

impl ErasedProgram {
    pub fn fun(&self, name: &str) -> Option<&Rc<FunDef>> {
        self.funs.iter().find(|f| f.sig.name == name)
    }

    /// The erased program in surface syntax.
    pub fn pretty(&self) -> String {
        let mut out: Vec<String> = self
            .funs
            .iter()
            .map(|f| pretty_decl(&Decl::Fun(erased_decl(f))))
            .collect();
        if let Some(m) = &self.main {
            let mut e = m.to_expr();
            untyped(&mut e);
            out.push(pretty_decl(&Decl::Main(e)));
        }
        out.join("\n\n")
    }
}

pub fn erase_program(p: &Elaborated) -> ErasedProgram {
    ErasedProgram {
        funs: p
            .funs
            .iter()
            .filter_map(|f| erase_fundef(f).map(Rc::new))
            .collect(),
        main: p.main.as_ref().map(erase),
    }
}

/// The erased form of a function; `None` for proof functions and externs.
pub fn erase_fundef(f: &FunDef) -> Option<FunDef> {
    let FunBody::Dyn(body) = &f.body else {
        return None;
    };
    if f.sig.kind == FunKind::PrFun {
        return None;
    }
    let sig = FunSig {
        quants: vec![],
        metric: None,
        inv: vec![],
        proofs: vec![],
        args: f.sig.args.clone(),
        ..f.sig.clone()
    };
    Some(FunDef {
        sig,
        body: FunBody::Dyn(erase(body)),
        span: f.span,
    })
}

/// Surface form of an erased function: no types, no result annotation.
pub fn erased_decl(f: &FunDef) -> ast::FunDecl {
    let mut d = crate::terms::fundef_to_decl(f);
    untyped_decl(&mut d);
    d
}

fn untyped_decl(d: &mut ast::FunDecl) {
    d.ret = None;
    for g in &mut d.params {
        for p in g {
            p.ty = None;
        }
    }
    if let Some(b) = &mut d.body {
        untyped(b);
    }
}

fn untyped(e: &mut ast::Expr) {
    use ast::ExprKind as K;
    match &mut e.kind {
        K::Tuple { items, .. } => items.iter_mut().for_each(untyped),
        K::Call { groups, .. } => groups.iter_mut().flatten().for_each(untyped),
        K::BinOp(_, a, b) | K::Sif(_, a, b) => {
            untyped(a);
            untyped(b);
        }
        K::If(c, a, b) => {
            untyped(c);
            untyped(a);
            untyped(b);
        }
        K::Let(ds, body) => {
            for d in ds {
                match d {
                    ast::LocalDecl::Val { rhs, .. } | ast::LocalDecl::PrVal { rhs, .. } => {
                        untyped(rhs)
                    }
                    ast::LocalDecl::Fun(f) => untyped_decl(f),
                }
            }
            untyped(body);
        }
        K::Lam { body, .. } | K::Fix { body, .. } | K::Ann(body, _) => untyped(body),
        _ => {}
    }
}

fn erase_params(ps: &[LamParam]) -> Vec<LamParam> {
    ps.iter()
        .map(|p| LamParam {
            name: p.name.clone(),
            ty: None,
            span: p.span,
        })
        .collect()
}

fn erase_pat(p: &DynPat) -> DynPat {
    let kind = match &p.kind {
        DynPatKind::Tuple { items, .. } => match items.len() {
            0 => DynPatKind::Wild,
            1 => return erase_pat(&items[0]),
            _ => DynPatKind::Tuple {
                proofs: None,
                items: items.iter().map(erase_pat).collect(),
            },
        },
        k => k.clone(),
    };
    DynPat { kind, span: p.span }
}

/// Erases a checked dynamic term.
pub fn erase(t: &DynTerm) -> DynTerm {
    let sp = t.span;
    let mk = |kind| DynTerm::new(kind, sp);
    let all = |xs: &[DynTerm]| xs.iter().map(erase).collect::<Vec<_>>();
    match &t.kind {
        DynKind::Var(_)
        | DynKind::Int(_)
        | DynKind::Bool(_)
        | DynKind::Null
        | DynKind::Loc(_)
        | DynKind::FunRef(_) => t.clone(),
        DynKind::Tuple { items, .. } => match items.len() {
            0 => DynTerm::unit(sp),
            1 => erase(&items[0]),
            _ => mk(DynKind::Tuple {
                proofs: None,
                items: all(items),
            }),
        },
        DynKind::Call {
            func, args, infix, ..
        } => mk(DynKind::Call {
            func: func.clone(),
            statics: None,
            inv: vec![],
            proofs: vec![],
            args: all(args),
            infix: *infix,
        }),
        DynKind::App { func, args, .. } => mk(DynKind::App {
            func: Box::new(erase(func)),
            proofs: vec![],
            args: all(args),
        }),
        DynKind::BinOp(op, a, b) => mk(DynKind::BinOp(*op, Box::new(erase(a)), Box::new(erase(b)))),
        DynKind::If(c, a, b) => mk(DynKind::If(
            Box::new(erase(c)),
            Box::new(erase(a)),
            Box::new(erase(b)),
        )),
        DynKind::Sif(c, a, b) => mk(DynKind::Sif(
            c.clone(),
            Box::new(erase(a)),
            Box::new(erase(b)),
        )),
        DynKind::Let(ds, body) => {
            let ds: Vec<DynDecl> = ds
                .iter()
                .filter_map(|d| match d {
                    DynDecl::Val { pat, rhs, span } => Some(DynDecl::Val {
                        pat: erase_pat(pat),
                        rhs: erase(rhs),
                        span: *span,
                    }),
                    DynDecl::PrVal { .. } => None,
                    DynDecl::Fun(f) => erase_fundef(f).map(|f| DynDecl::Fun(Rc::new(f))),
                })
                .collect();
            let body = erase(body);
            if ds.is_empty() {
                body
            } else {
                mk(DynKind::Let(ds, Box::new(body)))
            }
        }
        DynKind::Lam {
            once, params, body, ..
        } => mk(DynKind::Lam {
            once: *once,
            proofs: vec![],
            params: erase_params(params),
            body: Box::new(erase(body)),
        }),
        DynKind::Fix {
            name, params, body, ..
        } => mk(DynKind::Fix {
            name: name.clone(),
            params: erase_params(params),
            ret: None,
            body: Box::new(erase(body)),
        }),
        DynKind::Ann(x, _) | DynKind::Frame { body: x, .. } | DynKind::Release { body: x, .. } => {
            erase(x)
        }
        DynKind::Closure(f) => match erase_fundef(f) {
            Some(f) => mk(DynKind::Closure(Rc::new(f))),
            None => DynTerm::unit(sp),
        },
    }
}

/// Does the term still mention proofs or static annotations?
pub fn is_erased(t: &DynTerm) -> bool {
    let mut ok = true;
    visit(t, &mut |d| match &d.kind {
        DynKind::Tuple {
            proofs: Some(_), ..
        }
        | DynKind::Ann(..)
        | DynKind::Frame { .. }
        | DynKind::Release { .. } => ok = false,
        DynKind::Call {
            statics,
            inv,
            proofs,
            ..
        } => ok &= statics.is_none() && inv.is_empty() && proofs.is_empty(),
        DynKind::App { proofs, .. } => ok &= proofs.is_empty(),
        DynKind::Lam { proofs, params, .. } => {
            ok &= proofs.is_empty() && params.iter().all(|p| p.ty.is_none())
        }
        DynKind::Fix { ret, .. } => ok &= ret.is_none(),
        DynKind::Let(ds, _) => ok &= ds.iter().all(|d| !matches!(d, DynDecl::PrVal { .. })),
        _ => {}
    });
    ok
}

fn visit(t: &DynTerm, f: &mut dyn FnMut(&DynTerm)) {
    f(t);
    match &t.kind {
        DynKind::Tuple { items, .. } => items.iter().for_each(|x| visit(x, f)),
        DynKind::Call { args, .. } => args.iter().for_each(|x| visit(x, f)),
        DynKind::App { func, args, .. } => {
            visit(func, f);
            args.iter().for_each(|x| visit(x, f));
        }
        DynKind::BinOp(_, a, b) => {
            visit(a, f);
            visit(b, f);
        }
        DynKind::If(c, a, b) => {
            visit(c, f);
            visit(a, f);
            visit(b, f);
        }
        DynKind::Sif(_, a, b) => {
            visit(a, f);
            visit(b, f);
        }
        DynKind::Let(ds, body) => {
            for d in ds {
                match d {
                    DynDecl::Val { rhs, .. } => visit(rhs, f),
                    DynDecl::Fun(fd) => {
                        if let FunBody::Dyn(b) = &fd.body {
                            visit(b, f)
                        }
                    }
                    DynDecl::PrVal { .. } => {}
                }
            }
            visit(body, f);
        }
        DynKind::Lam { body, .. } | DynKind::Fix { body, .. } => visit(body, f),
        DynKind::Ann(x, _) | DynKind::Frame { body: x, .. } | DynKind::Release { body: x, .. } => {
            visit(x, f)
        }
        DynKind::Closure(fd) => {
            if let FunBody::Dyn(b) = &fd.body {
                visit(b, f)
            }
        }
        _ => {}
    }
}
