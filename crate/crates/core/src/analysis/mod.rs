//! Restricted-isometry diagnostics: brute-forced isometry constants on
//! small matrices, measured correlation extremes, and numerical checks of
//! the bounds and recovery conditions that govern the tree search.

mod bounds;
mod ric;

pub use bounds::{
    check_recovery_conditions, evaluate_bounds, measure_correlation_extremes, BoundCheck,
    BoundDiagnostics, BoundKind, ConditionCheck, ConditionConstants, ConditionKind,
    ConditionReport, CorrelationExtremes, Verdict, VERDICT_SLACK,
};
pub use ric::{ric_bruteforce, RicTable, RIC_ENUMERATION_LIMIT};
