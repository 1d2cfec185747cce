//! Checker state: unification variables, the static context, linear and
//! persistent variables, and deferred obligations.

use crate::diag::{Diagnostic, Span};
use crate::statics::{
    entails, fresh_name, satisfiable, LinForm, Name, Sort, SortCtx, StaticTerm as S,
};

use super::{Checker, Explained, R};

#[derive(Clone, Debug)]
pub(crate) struct MetaInfo {
    pub sort: Sort,
    pub value: Option<S>,
    /// Bound from a synthesized (lower-bound) type, so it may be widened.
    pub lower: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Entry {
    pub name: Name,
    pub proof: bool,
    pub ty: S,
    pub linear: bool,
    pub consumed: bool,
    /// Hidden inside a nested function body.
    pub hidden: bool,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub(crate) struct Obligation {
    pub sigma: SortCtx,
    pub hyps: Vec<S>,
    pub goal: S,
    pub span: Span,
    pub rule: &'static str,
    pub what: String,
}

/// A saved position of the scoped parts of the state.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Mark {
    pub sigma: usize,
    pub hyps: usize,
    pub vars: usize,
    pub locals: usize,
}

impl<'a> Checker<'a> {
    pub(crate) fn mark(&self) -> Mark {
        Mark {
            sigma: self.sigma.len(),
            hyps: self.hyps.len(),
            vars: self.vars.len(),
            locals: self.locals.len(),
        }
    }

    pub(crate) fn reset(&mut self, m: Mark) {
        self.sigma.truncate(m.sigma);
        self.hyps.truncate(m.hyps);
        self.vars.truncate(m.vars);
        self.locals.truncate(m.locals);
    }

    pub(crate) fn fresh_meta(&mut self, sort: Sort, _span: Span) -> S {
        self.metas.push(MetaInfo {
            sort,
            value: None,
            lower: false,
        });
        S::Meta(self.metas.len() as u32 - 1)
    }

    pub(crate) fn meta_value(&self, m: u32) -> Option<&S> {
        self.metas[m as usize].value.as_ref()
    }

    pub(crate) fn zonk(&self, t: &S) -> S {
        if !t.has_metas() {
            return t.clone();
        }
        t.zonk(&|m| self.metas[m as usize].value.clone())
    }

    pub(crate) fn bind_meta(&mut self, m: u32, value: S, lower: bool) {
        let info = &mut self.metas[m as usize];
        info.value = Some(value);
        info.lower = lower;
    }

    pub(crate) fn meta_sort(&self, m: u32) -> Sort {
        self.metas[m as usize].sort
    }

    pub(crate) fn skolem(&mut self, base: &str, sort: Sort) -> S {
        let n = fresh_name(base);
        self.sigma.push(n.clone(), sort);
        S::Var(n)
    }

    pub(crate) fn assume(&mut self, b: S) {
        self.hyps.push(b);
    }

    fn zonked_hyps(&self) -> Vec<S> {
        self.hyps.iter().map(|h| self.zonk(h)).collect()
    }

    pub(crate) fn live_with(&self, extra: &[S]) -> bool {
        let mut hs = self.zonked_hyps();
        hs.extend(extra.iter().map(|h| self.zonk(h)));
        satisfiable(&self.sigma, &hs)
    }

    /// Records `goal` under the current hypotheses; proved now if it has no
    /// unresolved metas, otherwise at the end of the declaration.
    pub(crate) fn oblige(
        &mut self,
        goal: S,
        span: Span,
        rule: &'static str,
        what: String,
    ) -> R<()> {
        let ob = Obligation {
            sigma: self.sigma.clone(),
            hyps: self.hyps.clone(),
            goal,
            span,
            rule,
            what,
        };
        if self.zonk(&ob.goal).has_metas() {
            self.deferred.push(ob);
            Ok(())
        } else {
            self.discharge(&ob)
        }
    }

    pub(crate) fn discharge(&mut self, ob: &Obligation) -> R<()> {
        let goal = self.zonk(&ob.goal);
        let hyps: Vec<S> = ob.hyps.iter().map(|h| self.zonk(h)).collect();
        let shown = render_constraint(&ob.sigma, &hyps, &goal);
        if goal.has_metas() {
            return Err(Diagnostic::error(
                "infer",
                ob.span,
                format!(
                    "cannot infer the static arguments needed for {}; give them explicitly",
                    ob.what
                ),
            )
            .with_constraint(shown));
        }
        let ok = entails(&ob.sigma, &hyps, &goal);
        if self.explain {
            self.explained.push(Explained {
                span: ob.span,
                rule: ob.rule,
                constraint: shown.clone(),
                holds: ok,
            });
        }
        if ok {
            Ok(())
        } else {
            Err(Diagnostic::error(
                ob.rule,
                ob.span,
                format!("cannot prove `{}` for {}", goal, ob.what),
            )
            .with_constraint(shown))
        }
    }

    /// Equates two index terms, binding metas where the equation determines them.
    pub(crate) fn index_eq(&mut self, a: &S, b: &S, sort: Sort, span: Span, what: &str) -> R<()> {
        let (a, b) = (self.zonk(a), self.zonk(b));
        if a == b {
            return Ok(());
        }
        for (x, y) in [(&a, &b), (&b, &a)] {
            if let S::Meta(m) = x {
                if !occurs(*m, y) {
                    self.bind_meta(*m, y.clone(), false);
                    return Ok(());
                }
            }
        }
        if sort != Sort::Bool && (a.has_metas() || b.has_metas()) {
            if let Some((m, v)) = solve_for_meta(&a, &b) {
                let v = match (sort, &v) {
                    (Sort::Addr, S::Int(c)) if *c >= 0 => S::Addr(*c as u64),
                    _ => v,
                };
                self.bind_meta(m, v, false);
                return Ok(());
            }
        }
        self.oblige(S::eq(a, b), span, "index", what.to_string())
    }

    pub(crate) fn push_var(
        &mut self,
        name: &str,
        proof: bool,
        ty: S,
        persistent: bool,
        span: Span,
    ) {
        let linear = !persistent && self.is_linear(&ty);
        self.vars.push(Entry {
            name: name.to_string(),
            proof,
            ty,
            linear,
            consumed: false,
            hidden: false,
            span,
        });
    }

    /// Looks a variable up, consuming it if linear.
    pub(crate) fn use_var(&mut self, name: &str, proof: bool, span: Span) -> R<Option<S>> {
        let Some(i) = self
            .vars
            .iter()
            .rposition(|e| e.name == name && e.proof == proof)
        else {
            return Ok(None);
        };
        let e = &mut self.vars[i];
        if e.hidden && e.linear {
            return Err(Diagnostic::error(
                "linear",
                span,
                format!(
                    "`{}` holds a linear {} and cannot be captured by a function",
                    name,
                    if proof { "proof" } else { "value" }
                ),
            ));
        }
        if e.linear {
            if e.consumed {
                return Err(Diagnostic::error(
                    "linear",
                    span,
                    format!("`{}` is used after it was consumed", name),
                ));
            }
            e.consumed = true;
        }
        Ok(Some(e.ty.clone()))
    }

    /// Every linear variable bound since `from` must be consumed.
    pub(crate) fn check_consumed(&self, from: usize, scope_end: Span) -> R<()> {
        for e in &self.vars[from..] {
            if e.linear && !e.consumed && !e.hidden {
                return Err(Diagnostic::error(
                    "linear",
                    e.span,
                    format!(
                        "linear {} `{}` : `{}` is never consumed",
                        if e.proof { "proof" } else { "value" },
                        e.name,
                        self.zonk(&e.ty)
                    ),
                )
                .with_constraint(format!("scope ends at byte {}", scope_end.end)));
            }
        }
        Ok(())
    }

    pub(crate) fn consumed_flags(&self) -> Vec<bool> {
        self.vars.iter().map(|e| e.consumed).collect()
    }

    pub(crate) fn set_consumed_flags(&mut self, flags: &[bool]) {
        for (e, f) in self.vars.iter_mut().zip(flags) {
            e.consumed = *f;
        }
    }

    pub(crate) fn is_linear(&self, t: &S) -> bool {
        match &self.zonk(t) {
            S::Boxed(_) | S::Emp => false,
            S::At(..) | S::Lolli(..) | S::App(..) => true,
            S::Tensor(xs) | S::Prod(xs) => xs.iter().any(|x| self.is_linear(x)),
            S::VAnd(v, t) => self.is_linear(v) || self.is_linear(t),
            S::Arrow(k, ..) | S::ViewArrow(k, ..) => *k == crate::statics::ArrowKind::Once,
            S::Forall(n, s, b) | S::Exists(n, s, b) => {
                let mut c = self.sigma.clone();
                c.push(n.clone(), *s);
                self.is_linear_in(&c, b)
            }
            S::Guard(_, b) | S::Assert(_, b) => self.is_linear(b),
            S::Var(a) => matches!(self.sigma.lookup(a), Some(Sort::View | Sort::ViewType)),
            S::Meta(m) => matches!(self.meta_sort(*m), Sort::View | Sort::ViewType),
            _ => false,
        }
    }

    fn is_linear_in(&self, ctx: &SortCtx, t: &S) -> bool {
        match t {
            S::Var(a) => matches!(ctx.lookup(a), Some(Sort::View | Sort::ViewType)),
            S::Forall(n, s, b) | S::Exists(n, s, b) => {
                let mut c = ctx.clone();
                c.push(n.clone(), *s);
                self.is_linear_in(&c, b)
            }
            other => self.is_linear(other),
        }
    }
}

pub(crate) fn occurs(m: u32, t: &S) -> bool {
    let mut set = std::collections::BTreeSet::new();
    t.metas(&mut set);
    set.contains(&m)
}

/// Solves `a = b` for a single meta with unit coefficient.
fn solve_for_meta(a: &S, b: &S) -> Option<(u32, S)> {
    let lf = crate::statics::normalize(a).sub(&crate::statics::normalize(b));
    let metas: Vec<(u32, i128)> = lf
        .terms
        .iter()
        .filter_map(|(at, c)| match at {
            crate::statics::Atom::Meta(m) => Some((*m, *c)),
            _ => None,
        })
        .collect();
    let opaque = lf
        .terms
        .keys()
        .any(|at| matches!(at, crate::statics::Atom::Opaque(_)));
    if metas.len() != 1 || opaque {
        return None;
    }
    let (m, c) = metas[0];
    if c != 1 && c != -1 {
        return None;
    }
    // c*m + rest = 0  =>  m = -rest / c
    let mut rest = lf.clone();
    rest.terms.remove(&crate::statics::Atom::Meta(m));
    let sol: LinForm = rest.scale(-c);
    Some((m, sol.to_term()))
}

pub(crate) fn render_constraint(sigma: &SortCtx, hyps: &[S], goal: &S) -> String {
    let vars: Vec<String> = sigma
        .iter()
        .filter(|(n, _)| goal.has_free(n) || hyps.iter().any(|h| h.has_free(n)))
        .map(|(n, s)| format!("{}:{}", n, s))
        .collect();
    let hs: Vec<String> = hyps.iter().map(|h| h.to_string()).collect();
    format!(
        "{} | {} |- {}",
        vars.join(", "),
        if hs.is_empty() {
            "true".into()
        } else {
            hs.join(", ")
        },
        goal
    )
}
