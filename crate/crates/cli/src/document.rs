//! JSON input and output documents.
//!
//! Exact values travel as a decimal-string mantissa and a binary exponent
//! (`value = mantissa / 2^exponent`) next to a double approximation, so a
//! reader needs no bignum support to round-trip them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use tribes_core::{
    ConstructionReport, Dyadic, Margin, QuantityCheck, TheoremCheck, VerificationReport,
};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub bounds: Vec<String>,
    #[serde(default)]
    pub mu: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct AnalysisDocument {
    pub talagrand_sum: f64,
    pub alpha: f64,
    pub mu_max: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct ExactDoc {
    pub mantissa: String,
    pub exponent: u64,
    pub approx: f64,
}

impl ExactDoc {
    pub fn from_dyadic(d: &Dyadic) -> Self {
        ExactDoc {
            mantissa: d.mantissa().to_string(),
            exponent: d.exponent(),
            approx: d.to_f64(),
        }
    }

    pub fn to_dyadic(&self) -> Result<Dyadic, String> {
        let mantissa: BigInt = self
            .mantissa
            .parse()
            .map_err(|_| format!("mantissa {:?} is not an integer", self.mantissa))?;
        Ok(Dyadic::new(mantissa, self.exponent))
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct InfluenceDoc {
    /// 1-based original variable index.
    pub index: usize,
    pub mantissa: String,
    pub exponent: u64,
    pub approx: f64,
    pub bound: String,
    pub strictly_below: bool,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct CheckDoc {
    pub pass: bool,
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_exact: Option<String>,
}

impl CheckDoc {
    fn from_check(c: &TheoremCheck) -> Self {
        CheckDoc {
            pass: c.pass,
            margin: c.margin.to_f64(),
            margin_exact: match &c.margin {
                Margin::Exact(r) => Some(r.to_string()),
                Margin::Approx(_) => None,
            },
        }
    }
}

pub fn checks_doc(checks: &[TheoremCheck]) -> BTreeMap<String, CheckDoc> {
    checks
        .iter()
        .map(|c| (c.name.as_str().to_string(), CheckDoc::from_check(c)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum QuantityDoc {
    Exact {
        quantity: String,
        analytic: ExactDoc,
        oracle: ExactDoc,
        equal: bool,
    },
    Sampled {
        quantity: String,
        analytic: f64,
        estimate: f64,
        stderr: f64,
        samples: u64,
        z: Option<f64>,
        flagged: bool,
    },
}

impl QuantityDoc {
    fn from_check(q: &QuantityCheck) -> Self {
        match q {
            QuantityCheck::Exact {
                quantity,
                analytic,
                oracle,
            } => QuantityDoc::Exact {
                quantity: quantity.clone(),
                analytic: ExactDoc::from_dyadic(analytic),
                oracle: ExactDoc::from_dyadic(oracle),
                equal: analytic == oracle,
            },
            QuantityCheck::Sampled {
                quantity,
                analytic,
                estimate,
                z,
                flagged,
            } => QuantityDoc::Sampled {
                quantity: quantity.clone(),
                analytic: *analytic,
                estimate: estimate.estimate,
                stderr: estimate.stderr,
                samples: estimate.samples,
                z: z.is_finite().then_some(*z),
                flagged: *flagged,
            },
        }
    }
}

/// Verification outcome. Wall time is left out so documents stay
/// byte-identical across runs.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct VerificationDoc {
    pub mode: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<QuantityDoc>,
    #[serde(default)]
    pub influences: Vec<QuantityDoc>,
    #[serde(default)]
    pub theorem_checks: BTreeMap<String, CheckDoc>,
}

impl VerificationDoc {
    pub fn from_report(v: &VerificationReport, seed: Option<u64>) -> Self {
        VerificationDoc {
            mode: v.mode.as_str().to_string(),
            passed: v.passed(),
            failure: None,
            seed,
            expectation: Some(QuantityDoc::from_check(&v.expectation)),
            influences: v.influences.iter().map(QuantityDoc::from_check).collect(),
            theorem_checks: checks_doc(&v.theorem_checks),
        }
    }

    pub fn failed(mode: &str, reason: String) -> Self {
        VerificationDoc {
            mode: mode.to_string(),
            passed: false,
            failure: Some(reason),
            seed: None,
            expectation: None,
            influences: Vec::new(),
            theorem_checks: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct DiagnosticsDoc {
    pub talagrand_ratio: Option<f64>,
    pub kkl_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct OutputDocument {
    pub n: usize,
    pub talagrand_sum: f64,
    pub alpha: f64,
    pub mu: String,
    pub mu_max: f64,
    pub guaranteed: bool,
    pub m: usize,
    pub tribe_sizes: Vec<usize>,
    pub residual: usize,
    pub m_star: usize,
    /// Original (1-based) variable at each construction position.
    pub var_map: Vec<usize>,
    pub expectation: ExactDoc,
    pub influences: Vec<InfluenceDoc>,
    pub checks: BTreeMap<String, CheckDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationDoc>,
    pub diagnostics: DiagnosticsDoc,
}

impl OutputDocument {
    pub fn from_report(r: &ConstructionReport, diagnostics: DiagnosticsDoc) -> Self {
        let influences = r
            .influences
            .iter()
            .zip(r.bounds.values())
            .zip(r.bounds.sources())
            .enumerate()
            .map(|(j, ((inf, bound), source))| InfluenceDoc {
                index: j + 1,
                mantissa: inf.mantissa().to_string(),
                exponent: inf.exponent(),
                approx: inf.to_f64(),
                bound: source.clone(),
                strictly_below: tribes_core::compare(inf, bound).is_lt(),
            })
            .collect();
        OutputDocument {
            n: r.bounds.len(),
            talagrand_sum: r.summary.talagrand_sum,
            alpha: r.summary.alpha,
            mu: r.mu.to_decimal_string().unwrap_or_else(|| r.mu.to_string()),
            mu_max: r.summary.mu_max,
            guaranteed: r.guaranteed,
            m: r.partition.m(),
            tribe_sizes: r.partition.sizes().to_vec(),
            residual: r.partition.residual(),
            m_star: r.m_star,
            var_map: r.function.var_map().iter().map(|v| v + 1).collect(),
            expectation: ExactDoc::from_dyadic(&r.expectation),
            influences,
            checks: checks_doc(&r.checks),
            verification: None,
            diagnostics,
        }
    }
}
