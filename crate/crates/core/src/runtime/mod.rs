//! Evaluation of erased and instrumented programs, with the store-typing
//! and store-entailment oracles.

pub mod eval;
pub mod oracle;
pub mod store;

pub use eval::{decide, Machine, Mode, Outcome, StepInfo, Stuck, StuckReason};
pub use oracle::{
    check_metatheory, entails_view, is_pure_type, state_type, store_typing_check, EntailError,
    MetaReport, StateOracle, StateType, Verdict,
};
pub use store::Store;
