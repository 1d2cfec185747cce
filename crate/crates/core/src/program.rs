//! Front door: parse, elaborate and check a source file.

use crate::check::{check_program, Checker, Explained};
use crate::diag::{Diagnostic, Span};
use crate::elab::{elaborate, Elaborated};
use crate::statics::StaticTerm as S;
use crate::syntax::parse_program;
use crate::terms::{visit_dyn_mut, visit_fundef_mut, DynKind, DynTerm};

/// Checker switches.
#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub explain_constraints: bool,
    pub trace_proofs: bool,
}

/// The result of checking one source file.
#[derive(Debug)]
pub struct CheckedProgram {
    pub program: Elaborated,
    pub main_type: Option<S>,
    pub diagnostics: Vec<Diagnostic>,
    pub explained: Vec<Explained>,
    pub proof_log: Vec<(Span, String)>,
}

impl CheckedProgram {
    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// Parses and checks `src`. Parse errors are returned as `Err`; type
    /// errors are collected in `diagnostics`.
    pub fn from_source(src: &str, opts: Options) -> Result<CheckedProgram, Diagnostic> {
        let ast = parse_program(src)?;
        let (program, mut diagnostics) = elaborate(&ast);
        let mut ck = Checker::new(&program.env);
        ck.explain = opts.explain_constraints;
        ck.trace_proofs = opts.trace_proofs;
        let (main_type, more) = check_program(&program, &mut ck);
        diagnostics.extend(more);
        let cell_types = std::mem::take(&mut ck.cell_types);
        diagnostics.sort_by_key(|d| d.span.start);
        let explained = std::mem::take(&mut ck.explained);
        let proof_log = std::mem::take(&mut ck.proof_log);
        drop(ck);
        let mut program = program;
        annotate_cells(&mut program, &cell_types);
        Ok(CheckedProgram {
            program,
            main_type,
            diagnostics,
            explained,
            proof_log,
        })
    }
}

/// Makes the cell type chosen for each `setPtr` call explicit, so that the
/// instrumented runtime can mint location proofs at that type. Types that
/// mention skolems are left for the runtime to infer.
fn annotate_cells(p: &mut Elaborated, cells: &[(Span, S)]) {
    let mut f = |t: &mut DynTerm| {
        if let DynKind::Call { func, statics, .. } = &mut t.kind {
            if func == "setPtr" && statics.is_none() {
                if let Some((_, a)) = cells.iter().find(|(sp, _)| *sp == t.span) {
                    if !a.has_metas() && a.free_vars().iter().all(|n| !n.contains('$')) {
                        *statics = Some(vec![a.clone()]);
                    }
                }
            }
        }
    };
    for def in &mut p.funs {
        visit_fundef_mut(std::rc::Rc::make_mut(def), &mut f);
    }
    if let Some(m) = &mut p.main {
        visit_dyn_mut(m, &mut f);
    }
}
