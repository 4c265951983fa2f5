//! Variant-distribution diagnostics, dependency normality and balancing.

mod balance;
mod coverage;
mod normality;
mod pareto;
pub mod report;

use thiserror::Error;

pub use balance::{balance, BalanceKind, BalanceStrategy};
pub use coverage::{coverage_table, rounded_pct, CoveragePoints, CoverageRow, CoverageTable};
pub use normality::{
    dependency_frequency_samples, normality_diagnostic, NormalityReport, CHI2_2DF_CRITICAL_5PCT,
    MIN_NORMALITY_SAMPLES,
};
pub use pareto::{
    hurwitz_zeta, pareto_fit, pareto_fit_counts, power_law_ccdf, ParetoFit, MIN_DISTINCT_COUNTS,
    MIN_TAIL,
};
pub use report::ReportFormat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("insufficient data: need at least {needed} {what}, found {found}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl StatsError {
    pub fn is_config(&self) -> bool {
        matches!(self, StatsError::Config(_))
    }
}
