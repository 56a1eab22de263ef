//! Acceptance criteria for `fbm-extremes`, checked against oracles that do not
//! share code with the library's formulas.

pub mod criteria;
pub mod dd;
pub mod oracle;

pub use criteria::{
    all_criteria, run_criteria, run_criterion, Criterion, CriterionReport, Measurement, Suite, ValidationConfig,
};
