//! Tribes functions that respect per-variable influence budgets.
//!
//! Given budgets `0 < a_1..a_n <= 1` and a target expectation `mu`, the
//! [`construct`] pipeline builds an OR of ANDs whose expectation lies in
//! `[mu, 3mu/4 + 1/4]` and whose every influence is strictly below its
//! budget. All probabilities are exact dyadic rationals; [`verify_exact`]
//! re-derives them by enumerating the truth table.

pub mod analysis;
pub mod construction;
pub mod error;
pub mod exact;
pub mod truth_table;
pub mod verify;

pub use analysis::{
    alpha, kkl_ratio, mu_max, talagrand_ratio, talagrand_sum, AnalysisSummary, BoundSequence,
    FLOAT_TOLERANCE,
};
pub use construction::{
    analytic_expectation, analytic_influence, analytic_tribe_influences, build, check_theorem,
    claim1_margin, construct, partition, select_m_star, sort_bounds, CheckName,
    ConstructOptions, ConstructionReport, Margin, SortedBounds, TheoremCheck, TribePartition,
    TribesFunction,
};
pub use error::{Result, TribesError};
pub use exact::{compare, Dyadic, ExactValue, Rational};
pub use truth_table::{
    evaluate, expectation, expectation_sampled, influence, influence_sampled, tribes_truth_table,
    variance, Assignment, SampledEstimate, TruthTable, DEFAULT_CAP,
};
pub use verify::{
    verify_exact, verify_sampled, QuantityCheck, VerificationReport, VerifyMode,
    DEFAULT_Z_THRESHOLD,
};
