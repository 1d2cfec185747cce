//! Bidirectional checking of proofs and programs.
//!
//! Index equations bind unification variables when they determine them;
//! every other arithmetic fact becomes an obligation for the solver.

mod ctx;
mod dynamic;
mod proof;
mod relate;

use crate::decls::{Env, FunSig};
use crate::diag::{Diagnostic, Span};
use crate::elab::Elaborated;
use crate::statics::{Name, Sort, SortCtx, StaticTerm as S};
use crate::syntax::ast::FunKind;
use crate::terms::{DynTerm, FunDef, ProofTerm};

use ctx::{Entry, MetaInfo, Obligation};

pub(crate) type R<T> = Result<T, Diagnostic>;

/// One solver query, recorded when constraint explanation is on.
#[derive(Clone, Debug)]
pub struct Explained {
    pub span: Span,
    pub rule: &'static str,
    pub constraint: String,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Recheck {
    pub got: S,
    pub want: S,
    pub span: Span,
    pub sigma: SortCtx,
    pub hyps: Vec<S>,
}

#[derive(Clone, Debug)]
pub(crate) struct FunFrame {
    pub name: Name,
    pub metric: Option<Vec<S>>,
    pub kind: FunKind,
}

pub struct Checker<'a> {
    pub(crate) env: &'a Env,
    pub(crate) metas: Vec<MetaInfo>,
    pub(crate) sigma: SortCtx,
    pub(crate) hyps: Vec<S>,
    pub(crate) vars: Vec<Entry>,
    pub(crate) locals: Vec<(Name, FunSig)>,
    pub(crate) deferred: Vec<Obligation>,
    pub(crate) rechecks: Vec<Recheck>,
    pub(crate) widened: bool,
    pub(crate) fun_stack: Vec<FunFrame>,
    pub(crate) used_locs: Vec<u64>,
    pub(crate) cell_sites: Vec<(Span, S)>,
    /// The cell type each `setPtr` call was checked at, by call span.
    pub cell_types: Vec<(Span, S)>,
    pub explain: bool,
    pub explained: Vec<Explained>,
    pub trace_proofs: bool,
    pub proof_log: Vec<(Span, String)>,
}

impl<'a> Checker<'a> {
    pub fn new(env: &'a Env) -> Self {
        Checker {
            env,
            metas: Vec::new(),
            sigma: SortCtx::default(),
            hyps: Vec::new(),
            vars: Vec::new(),
            locals: Vec::new(),
            deferred: Vec::new(),
            rechecks: Vec::new(),
            widened: false,
            fun_stack: Vec::new(),
            used_locs: Vec::new(),
            cell_sites: Vec::new(),
            cell_types: Vec::new(),
            explain: false,
            explained: Vec::new(),
            trace_proofs: false,
            proof_log: Vec::new(),
        }
    }

    fn begin(&mut self) {
        self.metas.clear();
        self.sigma = SortCtx::default();
        self.hyps.clear();
        self.vars.clear();
        self.locals.clear();
        self.deferred.clear();
        self.rechecks.clear();
        self.widened = false;
        self.fun_stack.clear();
        self.used_locs.clear();
        self.cell_sites.clear();
    }

    fn finish(&mut self) -> R<()> {
        if self.widened {
            let rs = std::mem::take(&mut self.rechecks);
            let (sigma, hyps) = (self.sigma.clone(), self.hyps.clone());
            for rc in rs {
                self.sigma = rc.sigma;
                self.hyps = rc.hyps;
                let r = self.relate(&rc.got, &rc.want, rc.span);
                self.sigma = sigma.clone();
                self.hyps = hyps.clone();
                r?;
            }
        }
        for i in 0..self.metas.len() {
            if self.metas[i].value.is_none() {
                let default = match self.metas[i].sort {
                    Sort::Type | Sort::ViewType => Some(S::Unit),
                    Sort::View => Some(S::Emp),
                    _ => None,
                };
                if let Some(d) = default {
                    self.bind_meta(i as u32, d, false);
                }
            }
        }
        while !self.deferred.is_empty() {
            let ds = std::mem::take(&mut self.deferred);
            for ob in &ds {
                self.discharge(ob)?;
            }
        }
        for (sp, t) in std::mem::take(&mut self.cell_sites) {
            let t = self.zonk(&t);
            self.cell_types.push((sp, t));
        }
        Ok(())
    }

    /// Checks a top-level function definition.
    pub fn check_fundef(&mut self, def: &FunDef) -> R<()> {
        self.begin();
        self.fundef_body(def)?;
        self.finish()
    }

    /// Checks the main expression and returns its type.
    pub fn check_main(&mut self, main: &DynTerm) -> R<S> {
        self.begin();
        let t = self.synth_dyn(main)?;
        self.finish()?;
        Ok(self.zonk(&t))
    }

    /// Checks an intermediate runtime term against `want`, returning the
    /// store locations whose proofs it holds.
    pub fn check_runtime(&mut self, term: &DynTerm, want: &S) -> R<Vec<u64>> {
        self.begin();
        self.check_dyn(term, want)?;
        self.finish()?;
        let mut locs = std::mem::take(&mut self.used_locs);
        locs.sort_unstable();
        Ok(locs)
    }
}

/// The static instantiation of a call with closed arguments.
#[derive(Clone, Debug)]
pub struct Instance {
    pub statics: Vec<(Name, S)>,
    /// Invariant arguments that were passed boxed.
    pub dropped: Vec<bool>,
}

impl<'a> Checker<'a> {
    /// Infers the statics of a call whose arguments are runtime values.
    pub fn instantiate_call(
        &mut self,
        sig: &FunSig,
        statics: Option<&[S]>,
        proofs: &[ProofTerm],
        args: &[DynTerm],
        span: Span,
    ) -> R<Instance> {
        self.begin();
        let inst = self.call_sig(sig, statics, &[], proofs, args, span)?;
        self.finish()?;
        Ok(Instance {
            statics: inst
                .sub
                .iter()
                .map(|(n, t)| (n.clone(), self.zonk(t)))
                .collect(),
            dropped: inst.dropped,
        })
    }

    /// The synthesized type of a closed value.
    pub fn value_type(&mut self, v: &DynTerm) -> R<S> {
        self.begin();
        let t = self.synth_dyn(v)?;
        self.finish()?;
        Ok(self.zonk(&t))
    }

    /// Does a closed value have type `t`?
    pub fn value_has_type(&mut self, v: &DynTerm, t: &S) -> bool {
        self.begin();
        self.check_dyn(v, t).and_then(|_| self.finish()).is_ok()
    }
}

/// Checks every function and the main expression of an elaborated program.
/// Returns the type of main, if there is one and it checks.
pub fn check_program(el: &Elaborated, ck: &mut Checker) -> (Option<S>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for f in &el.funs {
        if let Err(d) = ck.check_fundef(f) {
            diags.push(d);
        }
    }
    let mut main_ty = None;
    if let Some(m) = &el.main {
        match ck.check_main(m) {
            Ok(t) => main_ty = Some(t),
            Err(d) => diags.push(d),
        }
    }
    (main_ty, diags)
}
