//! Sort checking of (resolved) static terms.

use thiserror::Error;

use super::term::{ArrowKind, CmpOp, IntOp, Name, Sort, StaticTerm as S};

/// Static context Σ: ordered, later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortCtx {
    vars: Vec<(Name, Sort)>,
}

impl SortCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_binders(bs: &[(Name, Sort)]) -> Self {
        SortCtx { vars: bs.to_vec() }
    }

    pub fn push(&mut self, name: impl Into<Name>, sort: Sort) {
        self.vars.push((name.into(), sort));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.vars.truncate(n);
    }

    pub fn lookup(&self, name: &str) -> Option<Sort> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Sort)> {
        self.vars.iter()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("unbound static variable `{0}`")]
    Unbound(Name),
    #[error("`{term}` has sort {found}, expected {expected}")]
    Mismatch {
        term: String,
        expected: String,
        found: Sort,
    },
    #[error("unknown static constructor `{0}`")]
    UnknownHead(Name),
    #[error("`{name}` expects {expected} static arguments, got {found}")]
    Arity {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("unresolved unification variable ?{0}")]
    Unresolved(u32),
}

/// Sort signatures of applied names (dataviews, abbreviations).
pub trait HeadSorts {
    fn head_sorts(&self, name: &str) -> Option<(Vec<Sort>, Sort)>;
}

impl HeadSorts for () {
    fn head_sorts(&self, _: &str) -> Option<(Vec<Sort>, Sort)> {
        None
    }
}

/// `got` may stand where `want` is expected: types are viewtypes.
pub fn subsort(got: Sort, want: Sort) -> bool {
    got == want || (got == Sort::Type && want == Sort::ViewType)
}

fn mismatch(t: &S, expected: &str, found: Sort) -> SortError {
    SortError::Mismatch {
        term: t.to_string(),
        expected: expected.to_string(),
        found,
    }
}

pub fn expect_sort(
    ctx: &mut SortCtx,
    heads: &dyn HeadSorts,
    t: &S,
    want: Sort,
) -> Result<(), SortError> {
    let got = sort_check(ctx, heads, t)?;
    if subsort(got, want) {
        Ok(())
    } else {
        Err(mismatch(t, want.keyword(), got))
    }
}

fn is_typeish(s: Sort) -> bool {
    matches!(s, Sort::Type | Sort::ViewType)
}

pub fn sort_check(ctx: &mut SortCtx, heads: &dyn HeadSorts, t: &S) -> Result<Sort, SortError> {
    use Sort::*;
    let exp = |ctx: &mut SortCtx, t: &S, s: Sort| expect_sort(ctx, heads, t, s);
    Ok(match t {
        S::Var(n) => ctx.lookup(n).ok_or_else(|| SortError::Unbound(n.clone()))?,
        S::Meta(m) => return Err(SortError::Unresolved(*m)),
        S::Addr(_) => Addr,
        S::Int(_) => Int,
        S::Bool(_) => Bool,
        S::IntOp(op, a, b) => {
            let sa = sort_check(ctx, heads, a)?;
            let sb = sort_check(ctx, heads, b)?;
            match (op, sa, sb) {
                (_, Int, Int) => Int,
                (IntOp::Add | IntOp::Sub, Addr, Int) => Addr,
                (IntOp::Add, Int, Addr) => Addr,
                (IntOp::Sub, Addr, Addr) => Int,
                (_, Int, other) | (_, Addr, other) => return Err(mismatch(b, "int", other)),
                (_, other, _) => return Err(mismatch(a, "int or addr", other)),
            }
        }
        S::Neg(a) => {
            exp(ctx, a, Int)?;
            Int
        }
        S::Cmp(op, a, b) => {
            let sa = sort_check(ctx, heads, a)?;
            let sb = sort_check(ctx, heads, b)?;
            let ok = match (sa, sb) {
                (Int, Int) | (Addr, Addr) => true,
                (Bool, Bool) => matches!(op, CmpOp::Eq | CmpOp::Ne),
                _ => false,
            };
            if !ok {
                return Err(mismatch(b, sa.keyword(), sb));
            }
            Bool
        }
        S::Not(a) => {
            exp(ctx, a, Bool)?;
            Bool
        }
        S::And(a, b) | S::Or(a, b) | S::Implies(a, b) => {
            exp(ctx, a, Bool)?;
            exp(ctx, b, Bool)?;
            Bool
        }
        S::BoolTy | S::IntTy | S::Unit | S::Top => Type,
        S::BoolOf(b) => {
            exp(ctx, b, Bool)?;
            Type
        }
        S::IntOf(i) => {
            exp(ctx, i, Int)?;
            Type
        }
        S::Ptr(l) => {
            exp(ctx, l, Addr)?;
            Type
        }
        S::Prod(ts) => {
            let mut all_types = true;
            for x in ts {
                let s = sort_check(ctx, heads, x)?;
                if !is_typeish(s) {
                    return Err(mismatch(x, "viewtype", s));
                }
                all_types &= s == Type;
            }
            if all_types {
                Type
            } else {
                ViewType
            }
        }
        S::Arrow(k, a, b) => {
            exp(ctx, a, ViewType)?;
            exp(ctx, b, ViewType)?;
            if *k == ArrowKind::Pure {
                Type
            } else {
                ViewType
            }
        }
        S::ViewArrow(k, v, b) => {
            exp(ctx, v, View)?;
            exp(ctx, b, ViewType)?;
            if *k == ArrowKind::Pure {
                Type
            } else {
                ViewType
            }
        }
        S::At(ty, l) => {
            exp(ctx, ty, Type)?;
            exp(ctx, l, Addr)?;
            View
        }
        S::Emp => View,
        S::Tensor(vs) => {
            for v in vs {
                exp(ctx, v, View)?;
            }
            View
        }
        S::Lolli(a, b) => {
            exp(ctx, a, View)?;
            exp(ctx, b, View)?;
            View
        }
        S::Boxed(v) => {
            exp(ctx, v, View)?;
            View
        }
        S::VAnd(v, ty) => {
            exp(ctx, v, View)?;
            exp(ctx, ty, ViewType)?;
            ViewType
        }
        S::Guard(b, x) | S::Assert(b, x) => {
            exp(ctx, b, Bool)?;
            let s = sort_check(ctx, heads, x)?;
            if !matches!(s, View | Type | ViewType) {
                return Err(mismatch(x, "view or viewtype", s));
            }
            s
        }
        S::Forall(n, s, x) | S::Exists(n, s, x) => {
            ctx.push(n.clone(), *s);
            let r = sort_check(ctx, heads, x);
            ctx.pop();
            let r = r?;
            if !matches!(r, View | Type | ViewType) {
                return Err(mismatch(x, "view or viewtype", r));
            }
            r
        }
        S::App(name, args) => {
            let (params, res) = heads
                .head_sorts(name)
                .ok_or_else(|| SortError::UnknownHead(name.clone()))?;
            if params.len() != args.len() {
                return Err(SortError::Arity {
                    name: name.clone(),
                    expected: params.len(),
                    found: args.len(),
                });
            }
            for (a, s) in args.iter().zip(params) {
                exp(ctx, a, s)?;
            }
            res
        }
        S::Tuple { views, items } => {
            for v in views.iter().flatten() {
                exp(ctx, v, View)?;
            }
            let mut sorts = Vec::new();
            for x in items {
                sorts.push(sort_check(ctx, heads, x)?);
            }
            if views.is_some() {
                for (x, s) in items.iter().zip(&sorts) {
                    if !is_typeish(*s) {
                        return Err(mismatch(x, "viewtype", *s));
                    }
                }
                ViewType
            } else if !sorts.is_empty() && sorts.iter().all(|s| *s == View) {
                View
            } else {
                for (x, s) in items.iter().zip(&sorts) {
                    if !is_typeish(*s) {
                        return Err(mismatch(x, "viewtype", *s));
                    }
                }
                if sorts.iter().all(|s| *s == Type) {
                    Type
                } else {
                    ViewType
                }
            }
        }
        S::MultiAt(ts, l) => {
            for x in ts {
                exp(ctx, x, Type)?;
            }
            exp(ctx, l, Addr)?;
            View
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_offset_is_an_address() {
        let mut ctx = SortCtx::from_binders(&[("l".into(), Sort::Addr), ("i".into(), Sort::Int)]);
        let t = S::add(S::var("l"), S::var("i"));
        assert_eq!(sort_check(&mut ctx, &(), &t), Ok(Sort::Addr));
    }

    #[test]
    fn closed_equation_is_boolean() {
        let t = S::eq(S::Int(0), S::Int(0));
        assert_eq!(sort_check(&mut SortCtx::new(), &(), &t), Ok(Sort::Bool));
    }

    #[test]
    fn at_view_needs_an_address() {
        let mut ctx = SortCtx::from_binders(&[("a".into(), Sort::Type)]);
        let t = S::at(S::var("a"), S::var("a"));
        assert!(matches!(
            sort_check(&mut ctx, &(), &t),
            Err(SortError::Mismatch { .. })
        ));
    }

    #[test]
    fn unbound_variable_is_reported() {
        let t = S::var("zz");
        assert_eq!(
            sort_check(&mut SortCtx::new(), &(), &t),
            Err(SortError::Unbound("zz".into()))
        );
    }
}
