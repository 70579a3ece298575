//! Log-based quantities: the Talagrand sum of a budget sequence, the slack
//! `alpha`, the guaranteed expectation ceiling, and ratio diagnostics for the
//! Talagrand and KKL inequalities.
//!
//! These use double precision because they involve logarithms. None of them
//! feed the construction's exact comparisons.

use std::f64::consts::LN_2;

use crate::error::{Result, TribesError};
use crate::exact::{compare, Dyadic, Rational};

/// Absolute tolerance for checks that consume log-based quantities.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Influence budgets `a_1..a_n`, each an exact rational in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSequence {
    values: Vec<Rational>,
    approx: Vec<f64>,
    sources: Vec<String>,
}

impl BoundSequence {
    /// Parses decimal strings, rejecting anything outside `(0, 1]`.
    pub fn from_decimals<S: AsRef<str>>(decimals: &[S]) -> Result<Self> {
        let mut values = Vec::with_capacity(decimals.len());
        let mut approx = Vec::with_capacity(decimals.len());
        let mut sources = Vec::with_capacity(decimals.len());
        for s in decimals {
            let s = s.as_ref().trim();
            let value = Rational::parse_decimal(s)?;
            // std's float parser is correctly rounded, so this is the nearest double.
            let f = s.parse::<f64>().unwrap_or_else(|_| value.to_f64());
            values.push(value);
            approx.push(f);
            sources.push(s.to_string());
        }
        Self::checked(values, approx, sources)
    }

    pub fn from_rationals(values: Vec<Rational>) -> Result<Self> {
        let approx = values.iter().map(Rational::to_f64).collect();
        let sources = values
            .iter()
            .map(|v| v.to_decimal_string().unwrap_or_else(|| v.to_string()))
            .collect();
        Self::checked(values, approx, sources)
    }

    fn checked(values: Vec<Rational>, approx: Vec<f64>, sources: Vec<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(TribesError::InvalidArgument(
                "at least one bound is required".to_string(),
            ));
        }
        let one = Rational::one();
        for (j, v) in values.iter().enumerate() {
            if !v.is_positive() || compare(v, &one).is_gt() {
                return Err(TribesError::InvalidArgument(format!(
                    "bound a_{} = {} is outside (0, 1]",
                    j + 1,
                    sources[j]
                )));
            }
        }
        Ok(BoundSequence {
            values,
            approx,
            sources,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    /// The decimal strings the bounds were parsed from.
    pub fn sources(&self) -> &[String] {
        &self.sources
    }
}

/// Talagrand sum, `alpha`, and the guaranteed expectation ceiling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisSummary {
    pub talagrand_sum: f64,
    pub alpha: f64,
    pub mu_max: f64,
    pub feasible: bool,
}

impl AnalysisSummary {
    pub fn of(bounds: &BoundSequence) -> Self {
        let talagrand_sum = talagrand_terms(bounds.approx()).sum();
        let alpha = talagrand_sum - 2.0 * LN_2;
        AnalysisSummary {
            talagrand_sum,
            alpha,
            mu_max: mu_max(alpha),
            feasible: alpha > 0.0,
        }
    }
}

/// `x / (1 - log2 x)` on `(0, 1]`, with the `x = 1` term pinned to 1.
pub fn talagrand_term(x: f64) -> f64 {
    if x == 1.0 {
        1.0
    } else {
        x / (1.0 - x.log2())
    }
}

fn talagrand_terms(values: &[f64]) -> impl Iterator<Item = f64> + '_ {
    values.iter().map(|&v| talagrand_term(v))
}

/// `sum_j a_j / (1 - log2 a_j)`.
pub fn talagrand_sum(values: &[f64]) -> Result<f64> {
    if let Some(v) = values.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(TribesError::InvalidArgument(format!(
            "Talagrand sum needs values in (0, 1], got {v}"
        )));
    }
    Ok(talagrand_terms(values).sum())
}

/// Talagrand sum minus `2 ln 2`. May be negative.
pub fn alpha(bounds: &BoundSequence) -> f64 {
    AnalysisSummary::of(bounds).alpha
}

/// `1 - exp(-alpha / 8)` for positive `alpha`, else 0.
pub fn mu_max(alpha_value: f64) -> f64 {
    if alpha_value > 0.0 {
        -(-alpha_value / 8.0).exp_m1()
    } else {
        0.0
    }
}

/// Talagrand sum of the actual influences divided by the variance.
/// Zero influences contribute nothing.
pub fn talagrand_ratio(influences: &[Dyadic], variance: &Dyadic) -> Result<f64> {
    if variance.is_zero() {
        return Err(TribesError::ConstantFunction);
    }
    check_unit_interval(influences)?;
    let sum: f64 = influences
        .iter()
        .filter(|inf| !inf.is_zero())
        .map(|inf| talagrand_term(inf.to_f64()))
        .sum();
    Ok(sum / variance.to_f64())
}

/// `max_j Inf_j / ((log2 n / n) * Var)`.
pub fn kkl_ratio(influences: &[Dyadic], n: usize, variance: &Dyadic) -> Result<f64> {
    if n < 2 {
        return Err(TribesError::InvalidArgument(format!(
            "KKL ratio needs n >= 2, got {n}"
        )));
    }
    if variance.is_zero() {
        return Err(TribesError::ConstantFunction);
    }
    check_unit_interval(influences)?;
    let max = influences.iter().max().cloned().unwrap_or_else(Dyadic::zero);
    let n = n as f64;
    Ok(max.to_f64() / ((n.log2() / n) * variance.to_f64()))
}

fn check_unit_interval(influences: &[Dyadic]) -> Result<()> {
    match influences
        .iter()
        .find(|d| d.is_negative() || **d > Dyadic::one())
    {
        Some(d) => Err(TribesError::InvalidArgument(format!(
            "influence {d} outside [0, 1]"
        ))),
        None => Ok(()),
    }
}
