//! The statics: sorts, static terms, and the arithmetic decision procedure.

pub mod linform;
pub mod omega;
pub mod solver;
pub mod sort;
pub mod term;

pub use linform::{normalize, Atom, LinForm};
pub use solver::{entails, satisfiable};
pub use sort::{sort_check, HeadSorts, SortCtx, SortError};
pub use term::{fresh_name, ArrowKind, CmpOp, IntOp, Name, Sort, StaticTerm};
