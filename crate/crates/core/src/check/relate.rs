//! Subtyping and view matching, with unification of metas.
//!
//! `got ≤ want` is structural. Index positions produce equations; type
//! contents of at-views and covariant dataview parameters are compared
//! covariantly, everything else invariantly. A type meta bound from a
//! synthesized type is widened to a least upper bound on conflict.

use crate::diag::{Diagnostic, Span};
use crate::statics::{ArrowKind, Sort, StaticTerm as S};

use super::ctx::occurs;
use super::{Checker, Recheck, R};

fn flatten_tensor(t: &S, out: &mut Vec<S>) {
    match t {
        S::Tensor(xs) => xs.iter().for_each(|x| flatten_tensor(x, out)),
        S::Emp => {}
        other => out.push(other.clone()),
    }
}

fn kind_le(got: ArrowKind, want: ArrowKind) -> bool {
    got == want || (got == ArrowKind::Pure && want == ArrowKind::Once)
}

/// Saved meta state for a trial relation.
pub(crate) struct Snapshot {
    metas: Vec<super::ctx::MetaInfo>,
    deferred: usize,
    rechecks: usize,
}

impl<'a> Checker<'a> {
    pub(crate) fn snapshot(&self) -> Snapshot {
        Snapshot {
            metas: self.metas.clone(),
            deferred: self.deferred.len(),
            rechecks: self.rechecks.len(),
        }
    }

    pub(crate) fn restore(&mut self, s: Snapshot) {
        self.metas = s.metas;
        self.deferred.truncate(s.deferred);
        self.rechecks.truncate(s.rechecks);
    }

    /// Follows bound metas at the head only.
    fn head(&self, t: &S) -> S {
        let mut t = t.clone();
        while let S::Meta(m) = t {
            match self.meta_value(m) {
                Some(v) => t = v.clone(),
                None => break,
            }
        }
        t
    }

    /// Checks `got ≤ want`.
    pub(crate) fn relate(&mut self, got: &S, want: &S, span: Span) -> R<()> {
        if got.has_metas() || want.has_metas() {
            self.rechecks.push(Recheck {
                got: got.clone(),
                want: want.clone(),
                span,
                sigma: self.sigma.clone(),
                hyps: self.hyps.clone(),
            });
        }
        self.rel(got, want, span).map_err(|d| {
            if d.rule == "type-mismatch" && d.message.starts_with("structure") {
                let detail = d.message.trim_start_matches("structure").to_string();
                let (g, w) = (self.zonk(got), self.zonk(want));
                let top = format!("expected `{}`, found `{}`", w, g);
                Diagnostic::error(
                    "type-mismatch",
                    span,
                    if detail.is_empty() || detail == format!(": {}", top) {
                        top
                    } else {
                        format!("{}{}", top, detail)
                    },
                )
            } else {
                d
            }
        })
    }

    fn mismatch(&self, got: &S, want: &S, span: Span) -> Diagnostic {
        Diagnostic::error(
            "type-mismatch",
            span,
            format!(
                "structure: `{}` is not compatible with `{}`",
                self.zonk(got),
                self.zonk(want)
            ),
        )
    }

    fn rel(&mut self, got: &S, want: &S, span: Span) -> R<()> {
        // widening of a lower-bound type meta
        if let S::Meta(m) = want {
            let info = &self.metas[*m as usize];
            if let (Some(v), true) = (info.value.clone(), info.lower) {
                if matches!(info.sort, Sort::Type) {
                    let snap = self.snapshot();
                    match self.rel(got, &v, span) {
                        Ok(()) => return Ok(()),
                        Err(_) => {
                            self.restore(snap);
                            let l = self.lub(&v, got);
                            self.bind_meta(*m, l, true);
                            self.widened = true;
                            return Ok(());
                        }
                    }
                }
            }
        }
        let g = self.head(got);
        let w = self.head(want);
        if g == w {
            return Ok(());
        }
        if let S::Meta(m) = w {
            if occurs(m, &self.zonk(&g)) {
                return Err(self.mismatch(&g, &w, span));
            }
            let lower = matches!(self.meta_sort(m), Sort::Type);
            self.bind_meta(m, g, lower);
            return Ok(());
        }
        if let S::Meta(m) = g {
            if occurs(m, &self.zonk(&w)) {
                return Err(self.mismatch(&g, &w, span));
            }
            self.bind_meta(m, w, false);
            return Ok(());
        }
        match (&g, &w) {
            (_, S::Top) if !self.is_view_like(&g) => Ok(()),
            (S::IntOf(a), S::IntOf(b)) => self.index_eq(a, b, Sort::Int, span, "an integer index"),
            (S::IntOf(_), S::IntTy) | (S::BoolOf(_), S::BoolTy) => Ok(()),
            (S::BoolOf(a), S::BoolOf(b)) => {
                self.index_eq(a, b, Sort::Bool, span, "a boolean index")
            }
            (S::Ptr(a), S::Ptr(b)) => self.index_eq(a, b, Sort::Addr, span, "a pointer address"),
            (S::Prod(xs), S::Prod(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.rel(x, y, span)?;
                }
                Ok(())
            }
            (S::Arrow(k1, a1, b1), S::Arrow(k2, a2, b2))
            | (S::ViewArrow(k1, a1, b1), S::ViewArrow(k2, a2, b2))
                if kind_le(*k1, *k2)
                    && std::mem::discriminant(&g) == std::mem::discriminant(&w) =>
            {
                self.rel(a2, a1, span)?;
                self.rel(b1, b2, span)
            }
            (S::At(t1, l1), S::At(t2, l2)) => {
                self.rel(t1, t2, span)?;
                self.index_eq(l1, l2, Sort::Addr, span, "an at-view address")
            }
            (S::Lolli(a1, b1), S::Lolli(a2, b2)) => {
                self.rel(a2, a1, span)?;
                self.rel(b1, b2, span)
            }
            (S::Boxed(a), S::Boxed(b)) => self.rel(a, b, span),
            (S::Tensor(_), _) | (_, S::Tensor(_)) | (S::Emp, _) | (_, S::Emp) => {
                let (mut xs, mut ys) = (Vec::new(), Vec::new());
                flatten_tensor(&self.zonk(&g), &mut xs);
                flatten_tensor(&self.zonk(&w), &mut ys);
                if xs.len() != ys.len() || (xs.len() == 1 && xs[0] == g && ys[0] == w) {
                    return Err(self.mismatch(&g, &w, span));
                }
                for (x, y) in xs.iter().zip(&ys) {
                    self.rel(x, y, span)?;
                }
                Ok(())
            }
            (S::VAnd(v1, t1), S::VAnd(v2, t2)) => {
                self.rel(v1, v2, span)?;
                self.rel(t1, t2, span)
            }
            (S::VAnd(v, t), _) if self.is_empty_view(v) => self.rel(t, &w, span),
            (_, S::VAnd(v, t)) if self.is_empty_view(v) => self.rel(&g, t, span),
            (S::App(n1, xs), S::App(n2, ys)) if n1 == n2 && xs.len() == ys.len() => {
                let (sorts, cov) = match self.env.dataviews.get(n1) {
                    Some(d) => (d.sorts.clone(), d.covariant.clone()),
                    None => return Err(self.mismatch(&g, &w, span)),
                };
                for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                    if sorts[i].is_index() {
                        self.index_eq(
                            x,
                            y,
                            sorts[i],
                            span,
                            &format!("argument {} of `{}`", i + 1, n1),
                        )?;
                    } else if cov[i] {
                        self.rel(x, y, span)?;
                    } else {
                        self.rel(x, y, span)?;
                        self.rel(y, x, span)?;
                    }
                }
                Ok(())
            }
            (S::Forall(n1, s1, b1), S::Forall(n2, s2, b2))
            | (S::Exists(n1, s1, b1), S::Exists(n2, s2, b2))
                if s1 == s2 && std::mem::discriminant(&g) == std::mem::discriminant(&w) =>
            {
                let k = self.skolem(n1, *s1);
                let b1 = b1.subst(&[(n1.clone(), k.clone())]);
                let b2 = b2.subst(&[(n2.clone(), k)]);
                self.rel(&b1, &b2, span)
            }
            (S::Guard(p1, x1), S::Guard(p2, x2)) => {
                self.oblige(
                    S::Implies(p2.clone(), p1.clone()),
                    span,
                    "guard",
                    "a guard".into(),
                )?;
                self.rel(x1, x2, span)
            }
            (S::Assert(p1, x1), S::Assert(p2, x2)) => {
                self.oblige(
                    S::Implies(p1.clone(), p2.clone()),
                    span,
                    "assert",
                    "an assertion".into(),
                )?;
                self.rel(x1, x2, span)
            }
            _ => {
                let (gz, wz) = (self.zonk(&g), self.zonk(&w));
                if gz.alpha_eq(&wz) {
                    Ok(())
                } else {
                    Err(self.mismatch(&g, &w, span))
                }
            }
        }
    }

    fn is_empty_view(&self, v: &S) -> bool {
        let mut xs = Vec::new();
        flatten_tensor(&self.zonk(v), &mut xs);
        xs.is_empty()
    }

    fn is_view_like(&self, t: &S) -> bool {
        matches!(
            self.zonk(t),
            S::At(..)
                | S::Tensor(_)
                | S::Emp
                | S::Lolli(..)
                | S::Boxed(_)
                | S::App(..)
                | S::VAnd(..)
        )
    }

    /// Least upper bound of two types, used when a meta is widened.
    fn lub(&mut self, a: &S, b: &S) -> S {
        let (a, b) = (self.zonk(a), self.zonk(b));
        match (&a, &b) {
            (S::IntOf(_) | S::IntTy, S::IntOf(_) | S::IntTy) => S::IntTy,
            (S::BoolOf(_) | S::BoolTy, S::BoolOf(_) | S::BoolTy) => S::BoolTy,
            (S::Prod(xs), S::Prod(ys)) if xs.len() == ys.len() => {
                S::Prod(xs.iter().zip(ys).map(|(x, y)| self.lub(x, y)).collect())
            }
            _ => {
                let snap = self.snapshot();
                if self.rel(&b, &a, Span::DUMMY).is_ok() {
                    return a;
                }
                self.restore(snap);
                S::Top
            }
        }
    }

    /// Opens existentials and assertions of a synthesized type.
    pub(crate) fn open(&mut self, t: &S) -> S {
        let mut t = self.zonk(t);
        loop {
            match t {
                S::Exists(n, s, b) => {
                    let k = self.skolem(&n, s);
                    t = b.subst(&[(n, k)]);
                }
                S::Assert(p, b) => {
                    self.assume(*p);
                    t = *b;
                }
                other => return other,
            }
        }
    }

    /// Instantiates leading universals and guards of a synthesized type.
    pub(crate) fn instantiate(&mut self, t: &S, span: Span, what: &str) -> R<S> {
        let mut t = self.zonk(t);
        loop {
            match t {
                S::Forall(n, s, b) => {
                    let m = self.fresh_meta(s, span);
                    t = b.subst(&[(n, m)]);
                }
                S::Guard(p, b) => {
                    self.oblige(*p, span, "guard", what.to_string())?;
                    t = *b;
                }
                other => return Ok(other),
            }
        }
    }

    /// `got ≤ want` where `got` is synthesized and `want` may be packed.
    pub(crate) fn subsume(&mut self, got: &S, want: &S, span: Span) -> R<()> {
        let w0 = self.zonk(want);
        let mut g = self.open(got);
        if !matches!(w0, S::Forall(..) | S::Guard(..)) {
            g = self.instantiate(&g, span, "an instantiation")?;
        }
        let mut w = w0;
        let mut asserts = Vec::new();
        loop {
            match w {
                S::Exists(n, s, b) => {
                    let m = self.fresh_meta(s, span);
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
        self.relate(&g, &w, span)?;
        for p in asserts {
            self.oblige(p, span, "assert", "a packed assertion".into())?;
        }
        Ok(())
    }
}

pub(crate) fn components(t: &S) -> Vec<S> {
    match t {
        S::Tensor(xs) => xs.clone(),
        S::Emp => vec![],
        other => vec![other.clone()],
    }
}

pub(crate) fn items(t: &S, n: usize) -> Vec<S> {
    match t {
        S::Prod(xs) if n != 1 => xs.clone(),
        S::Unit if n == 0 => vec![],
        other => vec![other.clone()],
    }
}
