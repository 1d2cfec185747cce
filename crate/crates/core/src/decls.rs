//! Declaration environment: dataview constructor signatures, `viewdef` /
//! `typedef` abbreviations, function signatures, and resolution of surface
//! static terms into the formal connectives.

use std::collections::BTreeMap;

use crate::diag::{Diagnostic, Span};
use crate::statics::{
    sort_check, ArrowKind, HeadSorts, Name, Sort, SortCtx, SortError, StaticTerm as S,
};
use crate::syntax::ast::{self, AbbrevDecl, DataviewDecl, FunDecl, FunKind, QuantGroup};

/// A quantifier prefix entry, kept in source order.
#[derive(Clone, Debug, PartialEq)]
pub enum Quant {
    Bind(Name, Sort),
    Guard(S),
}

pub fn quants_of(groups: &[QuantGroup]) -> Vec<Quant> {
    let mut out = Vec::new();
    for g in groups {
        for (n, s) in &g.binders {
            out.push(Quant::Bind(n.clone(), *s));
        }
        for b in &g.guards {
            out.push(Quant::Guard(b.clone()));
        }
    }
    out
}

/// `∀binders. guards ⊃ (args ⊸ result)` for one dataview constructor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofConSig {
    pub name: Name,
    pub dataview: Name,
    pub binders: Vec<(Name, Sort)>,
    pub guards: Vec<S>,
    pub args: Vec<S>,
    /// The result head, `dataview(indices..)`.
    pub result: S,
    pub span: Span,
}

impl ProofConSig {
    pub fn indices(&self) -> &[S] {
        match &self.result {
            S::App(_, xs) => xs,
            _ => &[],
        }
    }

    /// The constructor's view as a single static term.
    pub fn view(&self) -> S {
        let body = S::Lolli(
            Box::new(S::tensor(self.args.clone())),
            Box::new(self.result.clone()),
        );
        S::forall_all(&self.binders, self.guards.clone(), body)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataviewSig {
    pub name: Name,
    pub sorts: Vec<Sort>,
    pub constructors: Vec<Name>,
    /// Per parameter: may a subtype stand in this position?
    pub covariant: Vec<bool>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbbrevSig {
    pub name: Name,
    pub params: Vec<(Name, Sort)>,
    pub body: S,
    pub sort: Sort,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSig {
    pub name: Name,
    pub ty: S,
    pub span: Span,
}

/// A resolved function signature. Parameters are split into invariant
/// proofs (the first of three `|`-groups), proofs, and dynamic arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct FunSig {
    pub name: Name,
    pub kind: FunKind,
    pub quants: Vec<Quant>,
    pub metric: Option<Vec<S>>,
    pub inv: Vec<ParamSig>,
    pub proofs: Vec<ParamSig>,
    pub args: Vec<ParamSig>,
    /// Declared result; invariant views are returned in addition.
    pub ret: S,
    pub span: Span,
}

impl FunSig {
    pub fn binders(&self) -> Vec<(Name, Sort)> {
        self.quants
            .iter()
            .filter_map(|q| match q {
                Quant::Bind(n, s) => Some((n.clone(), *s)),
                _ => None,
            })
            .collect()
    }

    /// The full result viewtype, including returned invariant views.
    pub fn full_ret(&self) -> S {
        if self.inv.is_empty() {
            return self.ret.clone();
        }
        let inv: Vec<S> = self.inv.iter().map(|p| p.ty.clone()).collect();
        match &self.ret {
            S::VAnd(v, t) => {
                let mut vs = inv;
                match &**v {
                    S::Tensor(xs) => vs.extend(xs.iter().cloned()),
                    S::Emp => {}
                    v => vs.push(v.clone()),
                }
                S::vand(S::tensor(vs), (**t).clone())
            }
            t => S::vand(S::tensor(inv), t.clone()),
        }
    }

    /// The formal type (functions) or view (proof functions).
    pub fn formal(&self) -> S {
        let views: Vec<S> = self
            .inv
            .iter()
            .chain(&self.proofs)
            .map(|p| p.ty.clone())
            .collect();
        let body = match self.kind {
            FunKind::PrFun => S::Lolli(Box::new(S::tensor(views)), Box::new(self.ret.clone())),
            FunKind::Fun => {
                let args: Vec<S> = self.args.iter().map(|p| p.ty.clone()).collect();
                S::Arrow(
                    ArrowKind::Pure,
                    Box::new(S::viewtype(views, args)),
                    Box::new(self.full_ret()),
                )
            }
        };
        let mut t = body;
        for q in self.quants.iter().rev() {
            t = match q {
                Quant::Bind(n, s) => S::Forall(n.clone(), *s, Box::new(t)),
                Quant::Guard(b) => S::Guard(Box::new(b.clone()), Box::new(t)),
            };
        }
        t
    }
}

/// Source of the built-in declarations.
pub const PRELUDE: &str = r#"
dataview arrayView (type, int, addr) =
  | {a:type, l:addr} ArrayNone (a, 0, l)
  | {a:type, n:int, l:addr | n >= 0}
      ArraySome (a, n+1, l) of (a @ l, arrayView (a, n, l+1))

extern fun getPtr {a:type, l:addr} (pf: a @ l | p: ptr l): '(a @ l | a)
extern fun setPtr {a:type, l:addr} (pf: top @ l | p: ptr l, x: a): '(a @ l | unit)
extern fun alloc {n:int | n >= 0} (n: int n): [l:addr | l <> null] '(arrayView (unit, n, l) | ptr l)
extern fun free {a:type, n:int, l:addr | n >= 0} (pf: arrayView (a, n, l) | p: ptr l, n: int n): unit
extern prfun viewbox {v:view} (pf: v): !v

extern fun igt {i:int, j:int} (x: int i, y: int j): bool (i > j)
extern fun ige {i:int, j:int} (x: int i, y: int j): bool (i >= j)
extern fun ilt {i:int, j:int} (x: int i, y: int j): bool (i < j)
extern fun ile {i:int, j:int} (x: int i, y: int j): bool (i <= j)
extern fun ieq {i:int, j:int} (x: int i, y: int j): bool (i == j)
extern fun ineq {i:int, j:int} (x: int i, y: int j): bool (i <> j)
extern fun ipred {i:int} (x: int i): int (i - 1)
extern fun isucc {i:int} (x: int i): int (i + 1)
extern fun isNull {l:addr} (p: ptr l): bool (l == null)
"#;

/// Functions whose evaluation is built into the runtime.
pub const BUILTIN_FUNS: &[&str] = &[
    "getPtr", "setPtr", "alloc", "free", "viewbox", "igt", "ige", "ilt", "ile", "ieq", "ineq",
    "ipred", "isucc", "isNull",
];

#[derive(Clone, Debug, Default)]
pub struct Env {
    pub dataviews: BTreeMap<Name, DataviewSig>,
    pub cons: BTreeMap<Name, ProofConSig>,
    pub abbrevs: BTreeMap<Name, AbbrevSig>,
    pub funs: BTreeMap<Name, FunSig>,
}

impl HeadSorts for Env {
    fn head_sorts(&self, name: &str) -> Option<(Vec<Sort>, Sort)> {
        self.dataviews
            .get(name)
            .map(|d| (d.sorts.clone(), Sort::View))
    }
}

fn sort_diag(e: SortError, span: Span) -> Diagnostic {
    Diagnostic::error("sort", span, e.to_string())
}

impl Env {
    /// An environment holding the prelude declarations.
    pub fn with_prelude() -> Env {
        let prog = crate::syntax::parse_program(PRELUDE).expect("prelude parses");
        let mut env = Env::default();
        for d in &prog.decls {
            env.declare(d).expect("prelude checks");
        }
        env
    }

    pub fn is_builtin(name: &str) -> bool {
        BUILTIN_FUNS.contains(&name)
    }

    /// Adds a top-level type-level declaration or function signature.
    pub fn declare(&mut self, d: &ast::Decl) -> Result<(), Diagnostic> {
        match d {
            ast::Decl::Dataview(dv) => self.declare_dataview(dv),
            ast::Decl::ViewDef(a) => self.declare_abbrev(a, true),
            ast::Decl::TypeDef(a) => self.declare_abbrev(a, false),
            ast::Decl::Fun(f) => {
                let sig = self.fun_sig(&SortCtx::new(), f)?;
                self.funs.insert(f.name.clone(), sig);
                Ok(())
            }
            ast::Decl::Main(_) => Ok(()),
        }
    }

    fn check_fresh_name(&self, name: &str, span: Span) -> Result<(), Diagnostic> {
        if self.abbrevs.contains_key(name) {
            return Err(Diagnostic::error(
                "decl",
                span,
                format!("`{}` is already declared", name),
            ));
        }
        Ok(())
    }

    pub fn declare_dataview(&mut self, dv: &DataviewDecl) -> Result<(), Diagnostic> {
        self.check_fresh_name(&dv.name, dv.span)?;
        // a redeclaration replaces the previous dataview and its constructors
        if let Some(old) = self.dataviews.remove(&dv.name) {
            for c in old.constructors {
                self.cons.remove(&c);
            }
        }
        self.dataviews.insert(
            dv.name.clone(),
            DataviewSig {
                name: dv.name.clone(),
                sorts: dv.sorts.clone(),
                constructors: vec![],
                covariant: vec![false; dv.sorts.len()],
                span: dv.span,
            },
        );
        let mut sigs = Vec::new();
        for c in &dv.clauses {
            match self.elaborate_clause(dv, c) {
                Ok(sig) => sigs.push(sig),
                Err(e) => {
                    self.dataviews.remove(&dv.name);
                    return Err(e);
                }
            }
        }
        let covariant = (0..dv.sorts.len())
            .map(|i| dv.sorts[i] == Sort::Type && sigs.iter().all(|s| covariant_in(s, i)))
            .collect();
        let entry = self.dataviews.get_mut(&dv.name).unwrap();
        entry.covariant = covariant;
        for s in sigs {
            entry.constructors.push(s.name.clone());
            self.cons.insert(s.name.clone(), s);
        }
        Ok(())
    }

    fn elaborate_clause(
        &self,
        dv: &DataviewDecl,
        c: &ast::ConClause,
    ) -> Result<ProofConSig, Diagnostic> {
        if self.cons.contains_key(&c.name) {
            return Err(Diagnostic::error(
                "decl",
                c.span,
                format!("constructor `{}` is already declared", c.name),
            ));
        }
        let mut ctx = SortCtx::from_binders(&c.quant.binders);
        let guards = c
            .quant
            .guards
            .iter()
            .map(|g| self.resolve_sorted(&mut ctx, g, Sort::Bool, c.span))
            .collect::<Result<Vec<_>, _>>()?;
        if c.indices.len() != dv.sorts.len() {
            return Err(Diagnostic::error(
                "decl",
                c.span,
                format!(
                    "constructor `{}` gives {} indices but `{}` takes {}",
                    c.name,
                    c.indices.len(),
                    dv.name,
                    dv.sorts.len()
                ),
            ));
        }
        let indices = c
            .indices
            .iter()
            .zip(&dv.sorts)
            .map(|(t, s)| self.resolve_sorted(&mut ctx, t, *s, c.span))
            .collect::<Result<Vec<_>, _>>()?;
        let args = c
            .args
            .iter()
            .flatten()
            .map(|t| self.resolve_sorted(&mut ctx, t, Sort::View, c.span))
            .collect::<Result<Vec<_>, _>>()?;
        for a in &args {
            if occurs_negatively(a, &dv.name, true) {
                return Err(Diagnostic::error(
                    "decl",
                    c.span,
                    format!(
                        "`{}` occurs in a negative position in constructor `{}`",
                        dv.name, c.name
                    ),
                ));
            }
        }
        Ok(ProofConSig {
            name: c.name.clone(),
            dataview: dv.name.clone(),
            binders: c.quant.binders.clone(),
            guards,
            args,
            result: S::App(dv.name.clone(), indices),
            span: c.span,
        })
    }

    pub fn declare_abbrev(&mut self, a: &AbbrevDecl, is_view: bool) -> Result<(), Diagnostic> {
        if self.dataviews.contains_key(&a.name) || self.abbrevs.contains_key(&a.name) {
            return Err(Diagnostic::error(
                "decl",
                a.span,
                format!("`{}` is already declared", a.name),
            ));
        }
        if a.body.free_vars().contains(&a.name) || mentions_head(&a.body, &a.name) {
            return Err(Diagnostic::error(
                "decl",
                a.span,
                format!("abbreviation `{}` may not be recursive", a.name),
            ));
        }
        let mut ctx = SortCtx::from_binders(&a.params);
        let want = if is_view { Sort::View } else { Sort::ViewType };
        let body = self.resolve_sorted(&mut ctx, &a.body, want, a.span)?;
        let sort = sort_check(&mut ctx, self, &body).map_err(|e| sort_diag(e, a.span))?;
        self.abbrevs.insert(
            a.name.clone(),
            AbbrevSig {
                name: a.name.clone(),
                params: a.params.clone(),
                body,
                sort,
            },
        );
        Ok(())
    }

    /// Substitutes `args` into the abbreviation `name`.
    pub fn expand_abbrev(&self, name: &str, args: &[S]) -> Option<S> {
        let a = self.abbrevs.get(name)?;
        if a.params.len() != args.len() {
            return None;
        }
        let sub: Vec<(Name, S)> = a
            .params
            .iter()
            .map(|(n, _)| n.clone())
            .zip(args.iter().cloned())
            .collect();
        Some(a.body.subst(&sub))
    }

    /// Resolves a function declaration's header under the outer static context.
    pub fn fun_sig(&self, outer: &SortCtx, f: &FunDecl) -> Result<FunSig, Diagnostic> {
        let mut ctx = outer.clone();
        let mut quants = Vec::new();
        for q in quants_of(&f.quants) {
            match q {
                Quant::Bind(n, s) => {
                    ctx.push(n.clone(), s);
                    quants.push(Quant::Bind(n, s));
                }
                Quant::Guard(b) => quants.push(Quant::Guard(self.resolve_sorted(
                    &mut ctx,
                    &b,
                    Sort::Bool,
                    f.span,
                )?)),
            }
        }
        let metric = match &f.metric {
            None => None,
            Some(m) => Some(
                m.iter()
                    .map(|t| self.resolve_sorted(&mut ctx, t, Sort::Int, f.span))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let mut resolved_groups = Vec::new();
        for g in &f.params {
            let mut out = Vec::new();
            for p in g {
                let ty = match &p.ty {
                    Some(t) => self.resolve(&mut ctx, t, None, p.span)?,
                    None => {
                        return Err(Diagnostic::error(
                            "decl",
                            p.span,
                            format!(
                                "parameter `{}` of `{}` needs a type annotation",
                                p.name, f.name
                            ),
                        ))
                    }
                };
                let sort = sort_check(&mut ctx, self, &ty).map_err(|e| sort_diag(e, p.span))?;
                out.push((
                    ParamSig {
                        name: p.name.clone(),
                        ty,
                        span: p.span,
                    },
                    sort,
                ));
            }
            resolved_groups.push(out);
        }
        let is_view = |s: Sort| s == Sort::View;
        let (inv, proofs, args) = match (f.kind, resolved_groups.len()) {
            (FunKind::PrFun, 1) => (vec![], resolved_groups.remove(0), vec![]),
            (FunKind::Fun, 1) => {
                let g = resolved_groups.remove(0);
                let (p, a): (Vec<_>, Vec<_>) = g.into_iter().partition(|(_, s)| is_view(*s));
                (vec![], p, a)
            }
            (FunKind::Fun, 2) => {
                let a = resolved_groups.pop().unwrap();
                (vec![], resolved_groups.pop().unwrap(), a)
            }
            (FunKind::Fun, 3) => {
                let a = resolved_groups.pop().unwrap();
                let p = resolved_groups.pop().unwrap();
                (resolved_groups.pop().unwrap(), p, a)
            }
            (_, n) => {
                return Err(Diagnostic::error(
                    "decl",
                    f.span,
                    format!("`{}` has {} parameter groups", f.name, n),
                ))
            }
        };
        for (p, s) in inv.iter().chain(&proofs) {
            if !is_view(*s) {
                return Err(Diagnostic::error(
                    "decl",
                    p.span,
                    format!("proof parameter `{}` must have a view, not a {}", p.name, s),
                ));
            }
        }
        for (p, s) in &args {
            if !matches!(s, Sort::Type | Sort::ViewType) {
                return Err(Diagnostic::error(
                    "decl",
                    p.span,
                    format!("parameter `{}` must have a viewtype, not a {}", p.name, s),
                ));
            }
        }
        let want = if f.kind == FunKind::PrFun {
            Sort::View
        } else {
            Sort::ViewType
        };
        let ret = match &f.ret {
            Some(r) => self.resolve_sorted(&mut ctx, r, want, f.span)?,
            None => {
                return Err(Diagnostic::error(
                    "decl",
                    f.span,
                    format!("`{}` needs a result annotation", f.name),
                ))
            }
        };
        let strip = |v: Vec<(ParamSig, Sort)>| v.into_iter().map(|(p, _)| p).collect();
        Ok(FunSig {
            name: f.name.clone(),
            kind: f.kind,
            quants,
            metric,
            inv: strip(inv),
            proofs: strip(proofs),
            args: strip(args),
            ret,
            span: f.span,
        })
    }

    /// Resolves and checks that the result has sort `want` (types count as viewtypes).
    pub fn resolve_sorted(
        &self,
        ctx: &mut SortCtx,
        t: &S,
        want: Sort,
        span: Span,
    ) -> Result<S, Diagnostic> {
        let r = self.resolve(ctx, t, Some(want), span)?;
        let got = sort_check(ctx, self, &r).map_err(|e| sort_diag(e, span))?;
        if crate::statics::sort::subsort(got, want) {
            Ok(r)
        } else {
            Err(Diagnostic::error(
                "sort",
                span,
                format!("`{}` has sort {}, expected {}", t, got, want),
            ))
        }
    }

    /// Rewrites surface forms (`int i`, tuples, multi-views, abbreviations)
    /// into formal connectives. `hint` disambiguates `'()`.
    pub fn resolve(
        &self,
        ctx: &mut SortCtx,
        t: &S,
        hint: Option<Sort>,
        span: Span,
    ) -> Result<S, Diagnostic> {
        let unbound =
            |n: &str| Diagnostic::error("sort", span, format!("unbound static name `{}`", n));
        Ok(match t {
            S::Var(n) => {
                if ctx.lookup(n).is_some() {
                    return Ok(t.clone());
                }
                match n.as_str() {
                    "int" => S::IntTy,
                    "bool" => S::BoolTy,
                    "unit" => S::Unit,
                    "top" => S::Top,
                    _ if self.abbrevs.contains_key(n) => {
                        self.expand_abbrev(n, &[]).ok_or_else(|| arity(n, span))?
                    }
                    _ if self.dataviews.get(n).is_some_and(|d| d.sorts.is_empty()) => {
                        S::App(n.clone(), vec![])
                    }
                    _ => return Err(unbound(n)),
                }
            }
            S::App(n, args) => {
                let builtin = match n.as_str() {
                    "int" => Some((Sort::Int, 0)),
                    "bool" => Some((Sort::Bool, 1)),
                    "ptr" => Some((Sort::Addr, 2)),
                    _ => None,
                };
                if let Some((s, which)) = builtin {
                    if args.len() != 1 {
                        return Err(arity(n, span));
                    }
                    let a = Box::new(self.resolve(ctx, &args[0], Some(s), span)?);
                    return Ok(match which {
                        0 => S::IntOf(a),
                        1 => S::BoolOf(a),
                        _ => S::Ptr(a),
                    });
                }
                let hints: Vec<Option<Sort>> = if let Some(a) = self.abbrevs.get(n) {
                    a.params.iter().map(|(_, s)| Some(*s)).collect()
                } else if let Some(d) = self.dataviews.get(n) {
                    d.sorts.iter().map(|s| Some(*s)).collect()
                } else {
                    return Err(Diagnostic::error(
                        "sort",
                        span,
                        format!("unknown view or type constructor `{}`", n),
                    ));
                };
                if hints.len() != args.len() {
                    return Err(arity(n, span));
                }
                let rargs = args
                    .iter()
                    .zip(hints)
                    .map(|(a, h)| self.resolve(ctx, a, h, span))
                    .collect::<Result<Vec<_>, _>>()?;
                if self.abbrevs.contains_key(n) {
                    self.expand_abbrev(n, &rargs)
                        .ok_or_else(|| arity(n, span))?
                } else {
                    S::App(n.clone(), rargs)
                }
            }
            S::Tuple { views, items } => match views {
                Some(vs) => {
                    let vs = vs
                        .iter()
                        .map(|v| self.resolve(ctx, v, Some(Sort::View), span))
                        .collect::<Result<Vec<_>, _>>()?;
                    let items = items
                        .iter()
                        .map(|x| self.resolve(ctx, x, Some(Sort::ViewType), span))
                        .collect::<Result<Vec<_>, _>>()?;
                    S::viewtype_keep(vs, items)
                }
                None => {
                    if items.is_empty() {
                        return Ok(if hint == Some(Sort::View) {
                            S::Emp
                        } else {
                            S::Unit
                        });
                    }
                    let rs = items
                        .iter()
                        .map(|x| self.resolve(ctx, x, hint, span))
                        .collect::<Result<Vec<_>, _>>()?;
                    let all_views = rs
                        .iter()
                        .all(|r| sort_check(&mut ctx.clone(), self, r) == Ok(Sort::View));
                    if all_views {
                        S::Tensor(rs)
                    } else {
                        S::Prod(rs)
                    }
                }
            },
            S::MultiAt(ts, l) => {
                let l = self.resolve(ctx, l, Some(Sort::Addr), span)?;
                let mut vs = Vec::new();
                for (i, ty) in ts.iter().enumerate() {
                    let ty = self.resolve(ctx, ty, Some(Sort::Type), span)?;
                    let at = if i == 0 {
                        l.clone()
                    } else {
                        S::add(l.clone(), S::Int(i as i64))
                    };
                    vs.push(S::at(ty, at));
                }
                S::tensor(vs)
            }
            S::Forall(n, s, b) | S::Exists(n, s, b) => {
                ctx.push(n.clone(), *s);
                let r = self.resolve(ctx, b, hint, span);
                ctx.pop();
                let b = Box::new(r?);
                if matches!(t, S::Forall(..)) {
                    S::Forall(n.clone(), *s, b)
                } else {
                    S::Exists(n.clone(), *s, b)
                }
            }
            S::Guard(g, b) | S::Assert(g, b) => {
                let g = Box::new(self.resolve(ctx, g, Some(Sort::Bool), span)?);
                let b = Box::new(self.resolve(ctx, b, hint, span)?);
                if matches!(t, S::Guard(..)) {
                    S::Guard(g, b)
                } else {
                    S::Assert(g, b)
                }
            }
            S::At(ty, l) => S::at(
                self.resolve(ctx, ty, Some(Sort::Type), span)?,
                self.resolve(ctx, l, Some(Sort::Addr), span)?,
            ),
            S::Boxed(v) => S::Boxed(Box::new(self.resolve(ctx, v, Some(Sort::View), span)?)),
            S::Lolli(a, b) => S::Lolli(
                Box::new(self.resolve(ctx, a, Some(Sort::View), span)?),
                Box::new(self.resolve(ctx, b, Some(Sort::View), span)?),
            ),
            S::Tensor(vs) => S::Tensor(
                vs.iter()
                    .map(|v| self.resolve(ctx, v, Some(Sort::View), span))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            S::VAnd(v, ty) => S::vand(
                self.resolve(ctx, v, Some(Sort::View), span)?,
                self.resolve(ctx, ty, Some(Sort::ViewType), span)?,
            ),
            S::ViewArrow(k, v, ty) => S::ViewArrow(
                *k,
                Box::new(self.resolve(ctx, v, Some(Sort::View), span)?),
                Box::new(self.resolve(ctx, ty, Some(Sort::ViewType), span)?),
            ),
            S::Arrow(k, a, b) => S::Arrow(
                *k,
                Box::new(self.resolve(ctx, a, Some(Sort::ViewType), span)?),
                Box::new(self.resolve(ctx, b, Some(Sort::ViewType), span)?),
            ),
            _ => {
                let mut err = None;
                let r = self.resolve_children(ctx, t, span, &mut err);
                if let Some(e) = err {
                    return Err(e);
                }
                r
            }
        })
    }

    fn resolve_children(
        &self,
        ctx: &mut SortCtx,
        t: &S,
        span: Span,
        err: &mut Option<Diagnostic>,
    ) -> S {
        let mut go = |x: &S, h: Option<Sort>| match self.resolve(ctx, x, h, span) {
            Ok(r) => r,
            Err(e) => {
                err.get_or_insert(e);
                x.clone()
            }
        };
        match t {
            S::IntOp(op, a, b) => S::IntOp(*op, Box::new(go(a, None)), Box::new(go(b, None))),
            S::Neg(a) => S::Neg(Box::new(go(a, Some(Sort::Int)))),
            S::Cmp(op, a, b) => S::Cmp(*op, Box::new(go(a, None)), Box::new(go(b, None))),
            S::Not(a) => S::Not(Box::new(go(a, Some(Sort::Bool)))),
            S::And(a, b) => S::And(
                Box::new(go(a, Some(Sort::Bool))),
                Box::new(go(b, Some(Sort::Bool))),
            ),
            S::Or(a, b) => S::Or(
                Box::new(go(a, Some(Sort::Bool))),
                Box::new(go(b, Some(Sort::Bool))),
            ),
            S::Implies(a, b) => S::Implies(
                Box::new(go(a, Some(Sort::Bool))),
                Box::new(go(b, Some(Sort::Bool))),
            ),
            S::BoolOf(a) => S::BoolOf(Box::new(go(a, Some(Sort::Bool)))),
            S::IntOf(a) => S::IntOf(Box::new(go(a, Some(Sort::Int)))),
            S::Ptr(a) => S::Ptr(Box::new(go(a, Some(Sort::Addr)))),
            S::Prod(xs) => S::Prod(xs.iter().map(|x| go(x, Some(Sort::ViewType))).collect()),
            other => other.clone(),
        }
    }
}

fn arity(n: &str, span: Span) -> Diagnostic {
    Diagnostic::error(
        "sort",
        span,
        format!("wrong number of static arguments to `{}`", n),
    )
}

impl S {
    /// Like [`S::viewtype`] but keeps a surface `'(v | t)` with no views as `'(| t)`.
    pub fn viewtype_keep(views: Vec<S>, items: Vec<S>) -> S {
        if views.is_empty() {
            S::prod(items)
        } else {
            S::vand(S::tensor(views), S::prod(items))
        }
    }
}

fn mentions_head(t: &S, name: &str) -> bool {
    let mut found = false;
    t.map(&mut |x| {
        if let S::App(n, _) = &x {
            if n == name {
                found = true;
            }
        }
        x
    });
    found
}

/// Does `name` occur to the left of a `⊸` or arrow inside `t`?
fn occurs_negatively(t: &S, name: &str, positive: bool) -> bool {
    match t {
        S::App(n, args) => {
            (n == name && !positive) || args.iter().any(|a| occurs_negatively(a, name, positive))
        }
        S::Lolli(a, b) | S::Arrow(_, a, b) | S::ViewArrow(_, a, b) => {
            occurs_negatively(a, name, !positive) || occurs_negatively(b, name, positive)
        }
        S::Tensor(xs) | S::Prod(xs) => xs.iter().any(|x| occurs_negatively(x, name, positive)),
        S::At(a, _) | S::Boxed(a) => occurs_negatively(a, name, positive),
        S::VAnd(a, b) => {
            occurs_negatively(a, name, positive) || occurs_negatively(b, name, positive)
        }
        S::Guard(_, b) | S::Assert(_, b) | S::Forall(_, _, b) | S::Exists(_, _, b) => {
            occurs_negatively(b, name, positive)
        }
        _ => false,
    }
}

/// Is type parameter `i` of the constructor's dataview used covariantly?
/// Requires the index to be a bare binder appearing only as at-view
/// contents or in the same position of recursive occurrences.
fn covariant_in(sig: &ProofConSig, i: usize) -> bool {
    let Some(S::Var(a)) = sig.indices().get(i) else {
        return false;
    };
    fn ok(t: &S, a: &str, dv: &str, i: usize) -> bool {
        match t {
            S::Var(_) => true,
            S::At(ty, _) => ty.as_ref() == &S::Var(a.to_string()) || !ty.has_free(a),
            S::App(n, args) if n == dv => args.iter().enumerate().all(|(j, x)| {
                if j == i {
                    x == &S::Var(a.to_string()) || !x.has_free(a)
                } else {
                    !x.has_free(a)
                }
            }),
            S::Tensor(xs) => xs.iter().all(|x| ok(x, a, dv, i)),
            S::Boxed(v) => ok(v, a, dv, i),
            other => !other.has_free(a),
        }
    }
    sig.guards.iter().all(|g| !g.has_free(a)) && sig.args.iter().all(|x| ok(x, a, &sig.dataview, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn env_of(src: &str) -> Env {
        let mut env = Env::with_prelude();
        for d in &parse_program(src).unwrap().decls {
            env.declare(d).unwrap();
        }
        env
    }

    const SLSEG: &str = r#"
dataview slsegView (type, int, addr, addr) =
  | {a:type, l:addr} SlsegNone (a, 0, l, l)
  | {a:type, n:int, first:addr, next:addr, last:addr | n >= 0, first <> null}
    SlsegSome (a, n+1, first, last) of
      ((a, ptr next) @ first, slsegView (a, n, next, last))
viewdef sllistView (a:type, n:int, l:addr) = slsegView (a, n, l, null)
viewdef circlistView (a:type,n:int,l:addr) = slsegView (a,n,l,l)
typedef ref (a: type) = [l:addr] '(!(a @ l) | ptr l)
"#;

    #[test]
    fn array_constructors_elaborate() {
        let env = Env::with_prelude();
        let none = &env.cons["ArrayNone"];
        assert!(none.args.is_empty());
        assert_eq!(none.result.to_string(), "arrayView(a, 0, l)");
        let some = &env.cons["ArraySome"];
        assert_eq!(some.guards[0].to_string(), "n >= 0");
        assert_eq!(some.args[0].to_string(), "a @ l");
        assert_eq!(some.args[1].to_string(), "arrayView(a, n, l + 1)");
        assert_eq!(some.result.to_string(), "arrayView(a, n + 1, l)");
        assert!(env.dataviews["arrayView"].covariant[0]);
    }

    #[test]
    fn multi_view_desugars_to_consecutive_cells() {
        let env = env_of(SLSEG);
        let some = &env.cons["SlsegSome"];
        assert_eq!(
            some.args[0].to_string(),
            "'(a @ first, ptr(next) @ first + 1 |)"
        );
        assert_eq!(
            env.cons["SlsegNone"].result.to_string(),
            "slsegView(a, 0, l, l)"
        );
    }

    #[test]
    fn viewdefs_expand_hereditarily() {
        let env = env_of(SLSEG);
        let t = env
            .expand_abbrev("sllistView", &[S::IntTy, S::Int(3), S::var("l")])
            .unwrap();
        assert_eq!(t.to_string(), "slsegView(int, 3, l, null)");
        let c = env
            .expand_abbrev("circlistView", &[S::var("T"), S::var("n"), S::var("l")])
            .unwrap();
        assert_eq!(c.to_string(), "slsegView(T, n, l, l)");
        let r = env.expand_abbrev("ref", &[S::var("T")]).unwrap();
        assert_eq!(r.to_string(), "[l:addr] '(!(T @ l) | ptr(l))");
    }

    #[test]
    fn expansion_is_hygienic() {
        let env = env_of(SLSEG);
        // the argument mentions the bound name `l` of `ref`'s body
        let r1 = env
            .expand_abbrev("ref", &[S::Ptr(Box::new(S::var("l")))])
            .unwrap();
        let r2 = env
            .expand_abbrev("ref", &[S::Ptr(Box::new(S::var("l")))])
            .unwrap();
        assert!(r1.alpha_eq(&r2));
        assert!(r1.free_vars().contains("l"));
    }

    #[test]
    fn recursive_abbreviation_is_rejected() {
        let mut env = Env::with_prelude();
        let p = parse_program("viewdef loop (l:addr) = loop (l)").unwrap();
        assert!(env.declare(&p.decls[0]).is_err());
    }

    #[test]
    fn negative_occurrence_is_rejected() {
        let mut env = Env::with_prelude();
        let p = parse_program("dataview bad (addr) = | {l:addr} Bad (l) of (bad (l) -o int @ l)")
            .unwrap();
        assert!(env.declare(&p.decls[0]).is_err());
    }

    #[test]
    fn builtin_signatures_have_the_expected_shape() {
        let env = Env::with_prelude();
        assert_eq!(
            env.funs["getPtr"].formal().to_string(),
            "{a:type, l:addr} a @ l ∧ ptr(l) -> a @ l ∧ a"
                .replace(" ∧ ", "|")
                .replace("a @ l|ptr(l)", "'(a @ l | ptr(l))")
                .replace("a @ l|a", "'(a @ l | a)")
        );
        let alloc = env.funs["alloc"].formal().to_string();
        assert!(alloc.contains("[l:addr | l <> null]"), "{}", alloc);
        assert_eq!(
            env.funs["isNull"].formal().to_string(),
            "{l:addr} ptr(l) -> bool(l == null)"
        );
    }
}
