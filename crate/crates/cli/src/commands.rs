use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use tribes_core::{
    construct, kkl_ratio, partition, select_m_star, sort_bounds, talagrand_ratio, verify_exact,
    verify_sampled, AnalysisSummary, BoundSequence, CheckName, ConstructionReport, Dyadic,
    Rational, TribePartition, TribesError, TribesFunction, DEFAULT_CAP, DEFAULT_Z_THRESHOLD,
};

use crate::document::{
    checks_doc, AnalysisDocument, DiagnosticsDoc, ExactDoc, InputDocument, OutputDocument,
    VerificationDoc,
};
use crate::exit;

/// A failed command: the exit code to return and a message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: exit::INPUT_ERROR,
            message: message.into(),
        }
    }
}

impl From<TribesError> for Failure {
    fn from(e: TribesError) -> Self {
        let code = match e {
            TribesError::MuNotAchievable { .. } | TribesError::ConstructionInfeasible => {
                exit::INFEASIBLE
            }
            TribesError::VerificationFailure { .. } => exit::VERIFICATION_FAILURE,
            _ => exit::INPUT_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type CommandResult = Result<i32, Failure>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyChoice {
    Exact,
    Sample,
    None,
}

#[derive(Clone, Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct SamplingArgs {
    /// Largest relevant-variable count verified by full enumeration.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    pub z_threshold: f64,
}

#[derive(Clone, Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Target expectation; overrides the document's `mu`.
    #[arg(long)]
    pub mu: Option<String>,
    /// Defaults to exact when the function fits under `--cap`, else sample.
    #[arg(long, value_enum)]
    pub verify: Option<VerifyChoice>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    /// A report written by `construct`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("malformed document {}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(
    value: &T,
    output: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write output: {e}"))),
    }
}

pub fn analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> CommandResult {
    let doc: InputDocument = read_json(&args.input)?;
    let bounds = BoundSequence::from_decimals(&doc.bounds)?;
    let s = AnalysisSummary::of(&bounds);
    let out = AnalysisDocument {
        talagrand_sum: s.talagrand_sum,
        alpha: s.alpha,
        mu_max: s.mu_max,
        feasible: s.feasible,
    };
    write_json(&out, None, stdout)?;
    Ok(exit::SUCCESS)
}

fn parse_mu(text: &str) -> Result<Rational, Failure> {
    let mu = Rational::parse_decimal(text)?;
    if !mu.is_positive() || mu >= Rational::one() {
        return Err(Failure::input(format!("mu must lie in (0, 1), got {text}")));
    }
    Ok(mu)
}

fn diagnostics(report: &ConstructionReport) -> DiagnosticsDoc {
    let e = &report.expectation;
    let variance = e * &e.one_minus().expect("expectation lies in [0, 1]");
    DiagnosticsDoc {
        talagrand_ratio: talagrand_ratio(&report.influences, &variance).ok(),
        kkl_ratio: kkl_ratio(&report.influences, report.bounds.len(), &variance).ok(),
    }
}

/// Runs exhaustive or sampled verification and records the outcome.
fn run_verification(
    function: &TribesFunction,
    report: &ConstructionReport,
    choice: VerifyChoice,
    sampling: &SamplingArgs,
) -> Result<VerificationDoc, Failure> {
    let outcome = match choice {
        VerifyChoice::Exact => verify_exact(function, report, sampling.cap)
            .map(|v| VerificationDoc::from_report(&v, None)),
        VerifyChoice::Sample => verify_sampled(
            function,
            report,
            sampling.samples,
            sampling.seed,
            sampling.z_threshold,
        )
        .map(|v| VerificationDoc::from_report(&v, Some(sampling.seed))),
        VerifyChoice::None => unreachable!("caller skips verification"),
    };
    let mode = if choice == VerifyChoice::Exact {
        "exhaustive"
    } else {
        "sampled"
    };
    match outcome {
        Ok(doc) => Ok(doc),
        Err(e @ TribesError::VerificationFailure { .. }) => {
            Ok(VerificationDoc::failed(mode, e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

fn default_choice(function: &TribesFunction, cap: usize) -> VerifyChoice {
    if function.relevant() <= cap {
        VerifyChoice::Exact
    } else {
        VerifyChoice::Sample
    }
}

pub fn construct_cmd(
    args: &ConstructArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CommandResult {
    let doc: InputDocument = read_json(&args.input)?;
    let bounds = BoundSequence::from_decimals(&doc.bounds)?;
    let mu_text = args
        .mu
        .as_deref()
        .or(doc.mu.as_deref())
        .ok_or_else(|| Failure::input("mu is required (--mu or \"mu\" in the document)"))?;
    let mu = parse_mu(mu_text)?;

    let report = construct(&bounds, &mu, Default::default())?;
    let mut out = OutputDocument::from_report(&report, diagnostics(&report));

    let choice = args
        .verify
        .unwrap_or_else(|| default_choice(&report.function, args.sampling.cap));
    let mut verified = true;
    if choice != VerifyChoice::None {
        let v = run_verification(&report.function, &report, choice, &args.sampling)?;
        verified = v.passed;
        if let Some(reason) = &v.failure {
            let _ = writeln!(stderr, "verification failed: {reason}");
        }
        out.verification = Some(v);
    }
    write_json(&out, args.output.as_deref(), stdout)?;

    Ok(if !verified || !report.all_checks_pass() {
        exit::VERIFICATION_FAILURE
    } else if report.guaranteed {
        exit::SUCCESS
    } else {
        exit::UNGUARANTEED
    })
}

fn mismatch(quantity: &str, stored: impl std::fmt::Debug, recomputed: impl std::fmt::Debug) -> String {
    format!("{quantity}: report has {stored:?}, recomputed {recomputed:?}")
}

/// Rebuilds the function and analytic report a document describes.
/// Structural problems are input errors; values that disagree with a fresh
/// computation are collected as verification failures.
fn reconstruct(
    doc: &OutputDocument,
) -> Result<(TribesFunction, ConstructionReport, Vec<String>), Failure> {
    let n = doc.influences.len();
    if n == 0 || doc.n != n {
        return Err(Failure::input(format!(
            "report lists {} influences for n = {}",
            n, doc.n
        )));
    }
    let mut ordered = doc.influences.clone();
    ordered.sort_by_key(|i| i.index);
    if ordered.iter().enumerate().any(|(j, i)| i.index != j + 1) {
        return Err(Failure::input("influence indices must be 1..=n"));
    }
    let bounds = BoundSequence::from_decimals(
        &ordered.iter().map(|i| i.bound.as_str()).collect::<Vec<_>>(),
    )?;
    let mu = parse_mu(&doc.mu)?;

    if doc.m_star == 0 || doc.m_star > doc.tribe_sizes.len() {
        return Err(Failure::input(format!(
            "m_star {} outside 1..={}",
            doc.m_star,
            doc.tribe_sizes.len()
        )));
    }
    if doc.var_map.contains(&0) {
        return Err(Failure::input("var_map entries are 1-based"));
    }
    let function = TribesFunction::new(
        doc.tribe_sizes[..doc.m_star].to_vec(),
        doc.var_map.iter().map(|v| v - 1).collect(),
        n,
    )
    .map_err(|e| Failure::input(format!("inconsistent tribe data: {e}")))?;
    let stored_partition = TribePartition::from_sizes(doc.tribe_sizes.clone(), n)
        .map_err(|e| Failure::input(format!("inconsistent tribe data: {e}")))?;

    let expectation = doc.expectation.to_dyadic().map_err(Failure::input)?;
    let influences = ordered
        .iter()
        .map(|i| {
            ExactDoc {
                mantissa: i.mantissa.clone(),
                exponent: i.exponent,
                approx: i.approx,
            }
            .to_dyadic()
            .map_err(Failure::input)
        })
        .collect::<Result<Vec<Dyadic>, _>>()?;

    let mut problems = Vec::new();
    let fresh_partition = partition(&sort_bounds(&bounds));
    if fresh_partition.sizes() != doc.tribe_sizes.as_slice() {
        problems.push(mismatch("tribe_sizes", &doc.tribe_sizes, fresh_partition.sizes()));
    }
    if doc.m != fresh_partition.m() {
        problems.push(mismatch("m", doc.m, fresh_partition.m()));
    }
    if doc.residual != fresh_partition.residual() {
        problems.push(mismatch("residual", doc.residual, fresh_partition.residual()));
    }
    match select_m_star(&fresh_partition, &mu) {
        Ok(m_star) if m_star == doc.m_star => {}
        other => problems.push(mismatch("m_star", doc.m_star, other)),
    }

    let summary = AnalysisSummary::of(&bounds);
    let mut report = ConstructionReport {
        claim1_margin: tribes_core::claim1_margin(&stored_partition, summary.alpha),
        bounds,
        guaranteed: summary.feasible
            && mu.to_f64() <= summary.mu_max + tribes_core::FLOAT_TOLERANCE,
        summary,
        mu,
        partition: stored_partition,
        m_star: doc.m_star,
        function: function.clone(),
        expectation,
        influences,
        checks: Vec::new(),
    };
    report.checks = tribes_core::check_theorem(&report, &report.bounds, &report.mu);
    Ok((function, report, problems))
}

/// Stored mirrors and flags must agree with the exact values they describe.
fn consistency_problems(doc: &OutputDocument, report: &ConstructionReport) -> Vec<String> {
    let mut problems = Vec::new();
    if doc.expectation.approx != report.expectation.to_f64() {
        problems.push(mismatch(
            "expectation approx",
            doc.expectation.approx,
            report.expectation.to_f64(),
        ));
    }
    let mut ordered: Vec<_> = doc.influences.iter().collect();
    ordered.sort_by_key(|i| i.index);
    for (i, inf) in ordered.iter().enumerate() {
        let exact = &report.influences[i];
        if inf.approx != exact.to_f64() {
            problems.push(mismatch(
                &format!("influence {} approx", inf.index),
                inf.approx,
                exact.to_f64(),
            ));
        }
        let below = tribes_core::compare(exact, &report.bounds.values()[i]).is_lt();
        if inf.strictly_below != below {
            problems.push(mismatch(
                &format!("influence {} strictly_below", inf.index),
                inf.strictly_below,
                below,
            ));
        }
    }
    if doc.guaranteed != report.guaranteed {
        problems.push(mismatch("guaranteed", doc.guaranteed, report.guaranteed));
    }
    let fresh = checks_doc(&report.checks);
    for name in CheckName::ALL {
        let key = name.as_str();
        let stored = doc.checks.get(key).map(|c| c.pass);
        let recomputed = fresh.get(key).map(|c| c.pass);
        if stored != recomputed {
            problems.push(mismatch(&format!("check {key}"), stored, recomputed));
        }
    }
    problems
}

pub fn verify_cmd(
    args: &VerifyArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CommandResult {
    let mut doc: OutputDocument = read_json(&args.input)?;
    let (function, report, mut problems) = reconstruct(&doc)?;
    problems.extend(consistency_problems(&doc, &report));

    let choice = default_choice(&function, args.sampling.cap);
    let mut verification = run_verification(&function, &report, choice, &args.sampling)?;
    if !problems.is_empty() {
        verification.passed = false;
        let joined = problems.join("; ");
        verification.failure = Some(match verification.failure.take() {
            Some(f) => format!("{f}; {joined}"),
            None => joined,
        });
    }
    if let Some(reason) = &verification.failure {
        let _ = writeln!(stderr, "verification failed: {reason}");
    }
    let passed = verification.passed;
    doc.verification = Some(verification);
    write_json(&doc, args.output.as_deref(), stdout)?;
    Ok(if passed {
        exit::SUCCESS
    } else {
        exit::VERIFICATION_FAILURE
    })
}
