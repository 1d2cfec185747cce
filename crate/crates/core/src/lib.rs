//! `viewcheck`: a checker and interpreter for a small ML-like language whose
//! memory safety is established by linear *stateful views*.
//!
//! The pipeline is:
//!
//! 1. [`syntax`] parses `.vats` source into a surface AST;
//! 2. [`decls`] elaborates `dataview` / `viewdef` / `typedef` declarations;
//! 3. [`elab`] classifies surface expressions into [`terms::ProofTerm`] and
//!    [`terms::DynTerm`];
//! 4. [`check`] assigns views to proofs and viewtypes to programs, discharging
//!    index constraints with the integer solver in [`statics`];
//! 5. [`erase`] strips proofs, and [`runtime`] evaluates either form against an
//!    explicit store.

pub mod check;
pub mod decls;
pub mod diag;
pub mod elab;
pub mod erase;
pub mod program;
pub mod runtime;
pub mod statics;
pub mod syntax;
pub mod terms;

pub use diag::{Diagnostic, Severity};
pub use program::{CheckedProgram, Options};
