//! Certification of a [`ConstructionReport`] against the definitions.
//!
//! Small functions are enumerated and every analytic value must match the
//! truth-table value exactly. Larger ones fall back to seeded sampling with a
//! z-score flag. The theorem checks are re-derived from the oracle's values
//! rather than read back from the report.

use std::time::{Duration, Instant};

use crate::analysis::{alpha, FLOAT_TOLERANCE};
use crate::construction::{
    check_theorem, claim1_margin, evaluate_checks, partition, sort_bounds, CheckInputs, CheckName,
    ConstructionReport, Margin, TheoremCheck, TribesFunction,
};
use crate::error::{Result, TribesError};
use crate::exact::Dyadic;
use crate::truth_table::{
    expectation, expectation_sampled, influence, influence_sampled, tribes_truth_table,
    SampledEstimate,
};

pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;

/// Fewest samples [`verify_sampled`] accepts.
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

impl VerifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyMode::Exhaustive => "exhaustive",
            VerifyMode::Sampled => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantityCheck {
    /// Analytic and truth-table values, required to be identical.
    Exact {
        quantity: String,
        analytic: Dyadic,
        oracle: Dyadic,
    },
    Sampled {
        quantity: String,
        analytic: f64,
        estimate: SampledEstimate,
        z: f64,
        flagged: bool,
    },
}

impl QuantityCheck {
    pub fn quantity(&self) -> &str {
        match self {
            QuantityCheck::Exact { quantity, .. } | QuantityCheck::Sampled { quantity, .. } => {
                quantity
            }
        }
    }

    pub fn ok(&self) -> bool {
        match self {
            QuantityCheck::Exact {
                analytic, oracle, ..
            } => analytic == oracle,
            QuantityCheck::Sampled { flagged, .. } => !flagged,
        }
    }

    fn sampled(quantity: String, analytic: f64, estimate: SampledEstimate, threshold: f64) -> Self {
        let diff = estimate.estimate - analytic;
        let z = if estimate.stderr > 0.0 {
            diff / estimate.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        QuantityCheck::Sampled {
            quantity,
            analytic,
            estimate,
            z,
            flagged: z.abs() > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub expectation: QuantityCheck,
    /// One entry per relevant position (exhaustive) or per tribe (sampled).
    pub influences: Vec<QuantityCheck>,
    pub theorem_checks: Vec<TheoremCheck>,
    pub wall_time: Duration,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.expectation.ok()
            && self.influences.iter().all(QuantityCheck::ok)
            && self.theorem_checks.iter().all(|c| c.pass)
    }
}

fn failure(quantity: impl Into<String>, analytic: &Dyadic, oracle: &Dyadic) -> TribesError {
    TribesError::VerificationFailure {
        quantity: quantity.into(),
        analytic: analytic.to_string(),
        oracle: oracle.to_string(),
    }
}

/// The function's tribes must be the first `m*` tribes the budgets produce.
fn check_structure(f: &TribesFunction, report: &ConstructionReport) -> Result<()> {
    let expected = partition(&sort_bounds(&report.bounds));
    let sizes = f.tribe_sizes();
    if sizes.is_empty() || !expected.sizes().starts_with(sizes) {
        return Err(TribesError::VerificationFailure {
            quantity: "tribe sizes".to_string(),
            analytic: format!("{sizes:?}"),
            oracle: format!("prefix of {:?}", expected.sizes()),
        });
    }
    if f.n() != report.bounds.len() || report.influences.len() != report.bounds.len() {
        return Err(TribesError::VerificationFailure {
            quantity: "variable count".to_string(),
            analytic: report.influences.len().to_string(),
            oracle: report.bounds.len().to_string(),
        });
    }
    Ok(())
}

/// Variables outside the tribes must carry influence exactly 0.
fn check_irrelevant(f: &TribesFunction, report: &ConstructionReport) -> Result<()> {
    let mut relevant = vec![false; f.n()];
    for &v in f.var_map() {
        relevant[v] = true;
    }
    for (v, inf) in report.influences.iter().enumerate() {
        if !relevant[v] && !inf.is_zero() {
            return Err(failure(
                format!("influence of irrelevant x_{}", v + 1),
                inf,
                &Dyadic::zero(),
            ));
        }
    }
    Ok(())
}

fn recomputed_claim1(report: &ConstructionReport) -> f64 {
    let p = partition(&sort_bounds(&report.bounds));
    claim1_margin(&p, alpha(&report.bounds))
}

/// Enumerates the truth table and requires bit-for-bit agreement on the
/// expectation and every influence.
pub fn verify_exact(
    f: &TribesFunction,
    report: &ConstructionReport,
    cap: usize,
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_structure(f, report)?;
    let tt = tribes_truth_table(f, cap)?;

    let oracle_expectation = expectation(&tt);
    if oracle_expectation != report.expectation {
        return Err(failure("expectation", &report.expectation, &oracle_expectation));
    }

    let mut oracle_influences = vec![Dyadic::zero(); f.n()];
    let mut influences = Vec::with_capacity(f.relevant());
    for (pos, &var) in f.var_map().iter().enumerate() {
        let oracle = influence(&tt, pos + 1)?;
        let analytic = &report.influences[var];
        let quantity = format!("influence of x_{} (position {})", var + 1, pos + 1);
        if &oracle != analytic {
            return Err(failure(quantity, analytic, &oracle));
        }
        oracle_influences[var] = oracle.clone();
        influences.push(QuantityCheck::Exact {
            quantity,
            analytic: analytic.clone(),
            oracle,
        });
    }
    check_irrelevant(f, report)?;

    let m_star = f.tribe_sizes().len();
    let prefix_table = tribes_truth_table(&f.prefix(m_star - 1), cap)?;
    let theorem_checks = evaluate_checks(&CheckInputs {
        bounds: &report.bounds,
        mu: &report.mu,
        expectation: &oracle_expectation,
        prefix_expectation: &expectation(&prefix_table),
        influences: &oracle_influences,
        claim1_margin: recomputed_claim1(report),
    });

    Ok(VerificationReport {
        mode: VerifyMode::Exhaustive,
        expectation: QuantityCheck::Exact {
            quantity: "expectation".to_string(),
            analytic: report.expectation.clone(),
            oracle: oracle_expectation,
        },
        influences,
        theorem_checks,
        wall_time: started.elapsed(),
    })
}

/// Estimates the expectation and one influence per tribe, flagging any
/// estimate more than `z_threshold` standard errors from the analytic value.
pub fn verify_sampled(
    f: &TribesFunction,
    report: &ConstructionReport,
    samples: u64,
    seed: u64,
    z_threshold: f64,
) -> Result<VerificationReport> {
    if samples < MIN_SAMPLES {
        return Err(TribesError::InvalidArgument(format!(
            "sampled verification needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let started = Instant::now();
    check_structure(f, report)?;
    check_irrelevant(f, report)?;

    let expectation = QuantityCheck::sampled(
        "expectation".to_string(),
        report.expectation.to_f64(),
        expectation_sampled(f, samples, seed)?,
        z_threshold,
    );
    let mut influences = Vec::with_capacity(f.tribe_sizes().len());
    for (i, range) in f.tribe_ranges().enumerate() {
        let pos = range.start;
        let var = f.var_map()[pos];
        let estimate = influence_sampled(f, pos + 1, samples, seed.wrapping_add(i as u64 + 1))?;
        influences.push(QuantityCheck::sampled(
            format!("influence of x_{} (tribe {})", var + 1, i + 1),
            report.influences[var].to_f64(),
            estimate,
            z_threshold,
        ));
    }

    let mut theorem_checks = check_theorem(report, &report.bounds, &report.mu);
    for c in &mut theorem_checks {
        if c.name == CheckName::Claim1 {
            let margin = recomputed_claim1(report);
            c.pass = margin >= -FLOAT_TOLERANCE;
            c.margin = Margin::Approx(margin);
        }
    }

    Ok(VerificationReport {
        mode: VerifyMode::Sampled,
        expectation,
        influences,
        theorem_checks,
        wall_time: started.elapsed(),
    })
}
