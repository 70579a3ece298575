//! The tribes construction.
//!
//! Budgets are sorted non-increasingly, cut greedily into tribes whose sizes
//! are the least `k` with `a_{s+k} > 2^{1-k}`, and tribes are added until the
//! failure product `prod (1 - 2^{-k_i})` drops to `1 - mu` or below. The
//! resulting OR-of-ANDs has exact dyadic expectation and influences, which
//! are computed here in closed form and checked against the theorem's
//! conclusions with exact arithmetic.

use std::cmp::Ordering;
use std::ops::Range;

use crate::analysis::{AnalysisSummary, BoundSequence, FLOAT_TOLERANCE};
use crate::error::{Result, TribesError};
use crate::exact::{compare, Dyadic, Rational};

/// Budgets in non-increasing order. `perm[p]` is the original (0-based)
/// index of the budget at sorted position `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedBounds {
    sorted: Vec<Rational>,
    perm: Vec<usize>,
}

impl SortedBounds {
    pub fn sorted(&self) -> &[Rational] {
        &self.sorted
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// Stable non-increasing sort; ties keep their original order.
pub fn sort_bounds(bounds: &BoundSequence) -> SortedBounds {
    let values = bounds.values();
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| compare(&values[b], &values[a]));
    SortedBounds {
        sorted: perm.iter().map(|&p| values[p].clone()).collect(),
        perm,
    }
}

/// Tribe sizes `k_1..k_m` cut from the sorted budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TribePartition {
    sizes: Vec<usize>,
    prefix: Vec<usize>,
    n: usize,
}

impl TribePartition {
    /// Rebuilds a partition from stored tribe sizes. Only the shape is
    /// validated here; [`partition`] is the authority on which sizes the
    /// budgets actually produce.
    pub fn from_sizes(sizes: Vec<usize>, n: usize) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(TribesError::InvalidArgument(
                "tribe sizes must be positive".to_string(),
            ));
        }
        let prefix: Vec<usize> = sizes
            .iter()
            .scan(0usize, |s, &k| {
                *s += k;
                Some(*s)
            })
            .collect();
        if prefix.last().is_some_and(|&s| s > n) {
            return Err(TribesError::InvalidArgument(format!(
                "tribes cover {} variables but n = {n}",
                prefix.last().unwrap()
            )));
        }
        Ok(TribePartition { sizes, prefix, n })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of tribes `m`.
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `s_i = k_1 + ... + k_i`, with `s_0 = 0`.
    pub fn prefix_sum(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.prefix[i - 1]
        }
    }

    /// `k_{m+1} = n - s_m + 1`. Reported only.
    pub fn residual(&self) -> usize {
        self.n - self.prefix_sum(self.m()) + 1
    }

    /// Positions (0-based, sorted order) covered by tribe `i` (1-based).
    pub fn tribe_positions(&self, i: usize) -> Range<usize> {
        self.prefix_sum(i - 1)..self.prefix_sum(i)
    }

    /// The 1-based tribe containing 1-based position `q`, if any.
    pub fn tribe_of(&self, q: usize) -> Option<usize> {
        let idx = self.prefix.partition_point(|&s| s < q);
        (idx < self.m() && q >= 1).then_some(idx + 1)
    }

    /// `1 - 2^{-k_i}` for each tribe.
    fn survival_factors(&self, m_star: usize) -> Vec<Dyadic> {
        self.sizes[..m_star]
            .iter()
            .map(|&k| {
                Dyadic::pow2_neg(k as u64)
                    .and_then(|d| d.one_minus())
                    .expect("tribe sizes are positive")
            })
            .collect()
    }

    /// `prod_{i <= r} (1 - 2^{-k_i})` for `r = 0..=m_star`.
    pub fn survival_products(&self, m_star: usize) -> Vec<Dyadic> {
        let mut out = Vec::with_capacity(m_star + 1);
        out.push(Dyadic::one());
        for f in self.survival_factors(m_star) {
            let next = out.last().unwrap() * &f;
            out.push(next);
        }
        out
    }
}

/// `2^{1-k}`: the threshold a budget has to beat to close a tribe of size `k`.
fn tribe_threshold(k: usize) -> Dyadic {
    if k == 1 {
        Dyadic::one()
    } else {
        Dyadic::pow2_neg(k as u64 - 1).expect("k >= 2")
    }
}

/// Greedy tribe sizes. Only indices within `1..=n` are considered, so the
/// process stops as soon as no remaining budget beats its threshold.
pub fn partition(sb: &SortedBounds) -> TribePartition {
    let n = sb.len();
    let mut sizes = Vec::new();
    let mut start = 0usize;
    'tribes: loop {
        for k in 1..=n - start {
            if compare(&sb.sorted[start + k - 1], &tribe_threshold(k)) == Ordering::Greater {
                sizes.push(k);
                start += k;
                continue 'tribes;
            }
        }
        break;
    }
    TribePartition::from_sizes(sizes, n).expect("greedy sizes fit in n")
}

/// Least `r` with `prod_{i <= r} (1 - 2^{-k_i}) <= 1 - mu`.
pub fn select_m_star(p: &TribePartition, mu: &Rational) -> Result<usize> {
    check_mu(mu)?;
    if p.m() == 0 {
        return Err(TribesError::ConstructionInfeasible);
    }
    let target = &Rational::one() - mu;
    let mut product = Dyadic::one();
    for (r, factor) in p.survival_factors(p.m()).iter().enumerate() {
        product = &product * factor;
        if compare(&product, &target) != Ordering::Greater {
            return Ok(r + 1);
        }
    }
    Err(TribesError::MuNotAchievable {
        mu: mu.to_string(),
        tribes: p.m(),
    })
}

fn check_mu(mu: &Rational) -> Result<()> {
    if !mu.is_positive() || compare(mu, &Rational::one()) != Ordering::Less {
        return Err(TribesError::InvalidArgument(format!(
            "mu must lie in (0, 1), got {mu}"
        )));
    }
    Ok(())
}

/// An OR of ANDs over disjoint blocks of variables.
///
/// Construction positions `0..relevant()` are laid out tribe by tribe;
/// `var_map[q]` is the original variable behind position `q`. Every other
/// original variable is irrelevant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TribesFunction {
    tribe_sizes: Vec<usize>,
    var_map: Vec<usize>,
    n: usize,
}

impl TribesFunction {
    pub fn new(tribe_sizes: Vec<usize>, var_map: Vec<usize>, n: usize) -> Result<Self> {
        if tribe_sizes.contains(&0) {
            return Err(TribesError::InvalidArgument(
                "tribe sizes must be positive".to_string(),
            ));
        }
        let relevant: usize = tribe_sizes.iter().sum();
        if var_map.len() != relevant {
            return Err(TribesError::InvalidArgument(format!(
                "var_map has {} entries but tribes cover {relevant} positions",
                var_map.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &var_map {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(TribesError::InvalidArgument(format!(
                    "var_map entry {v} is out of range or repeated"
                )));
            }
        }
        Ok(TribesFunction {
            tribe_sizes,
            var_map,
            n,
        })
    }

    /// Tribes over positions `0..sum(sizes)` mapped to themselves.
    pub fn identity(tribe_sizes: Vec<usize>, n: usize) -> Result<Self> {
        let relevant = tribe_sizes.iter().sum();
        Self::new(tribe_sizes, (0..relevant).collect(), n)
    }

    pub fn tribe_sizes(&self) -> &[usize] {
        &self.tribe_sizes
    }

    pub fn var_map(&self) -> &[usize] {
        &self.var_map
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `s_{m*}`: number of relevant variables.
    pub fn relevant(&self) -> usize {
        self.var_map.len()
    }

    /// Position ranges of each tribe.
    pub fn tribe_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.tribe_sizes.iter().scan(0usize, |start, &k| {
            let r = *start..*start + k;
            *start += k;
            Some(r)
        })
    }

    /// The same function with only its first `count` tribes.
    pub fn prefix(&self, count: usize) -> TribesFunction {
        let sizes = self.tribe_sizes[..count].to_vec();
        let relevant: usize = sizes.iter().sum();
        TribesFunction {
            tribe_sizes: sizes,
            var_map: self.var_map[..relevant].to_vec(),
            n: self.n,
        }
    }
}

/// The tribes function on the first `m_star` tribes, with position `q`
/// wired to original variable `perm[q]`.
pub fn build(p: &TribePartition, m_star: usize, sb: &SortedBounds) -> Result<TribesFunction> {
    if m_star == 0 || m_star > p.m() {
        return Err(TribesError::InvalidArgument(format!(
            "m_star = {m_star} outside 1..={}",
            p.m()
        )));
    }
    let relevant = p.prefix_sum(m_star);
    TribesFunction::new(
        p.sizes()[..m_star].to_vec(),
        sb.perm()[..relevant].to_vec(),
        p.n(),
    )
}

/// `1 - prod_{i <= m_star} (1 - 2^{-k_i})`. Zero for `m_star = 0`.
pub fn analytic_expectation(p: &TribePartition, m_star: usize) -> Dyadic {
    let products = p.survival_products(m_star.min(p.m()));
    &Dyadic::one() - products.last().unwrap()
}

/// Influence of each of the first `m_star` tribes' variables:
/// `2^{1-k_i} prod_{l != i} (1 - 2^{-k_l})`, built from prefix and suffix
/// products so nothing is divided.
pub fn analytic_tribe_influences(p: &TribePartition, m_star: usize) -> Vec<Dyadic> {
    let factors = p.survival_factors(m_star);
    let prefix = p.survival_products(m_star);
    let mut suffix = vec![Dyadic::one(); m_star + 1];
    for i in (0..m_star).rev() {
        suffix[i] = &suffix[i + 1] * &factors[i];
    }
    (0..m_star)
        .map(|i| {
            let others = &prefix[i] * &suffix[i + 1];
            &tribe_threshold(p.sizes()[i]) * &others
        })
        .collect()
}

/// Influence of 1-based construction position `q`; zero beyond `s_{m_star}`.
pub fn analytic_influence(p: &TribePartition, m_star: usize, q: usize) -> Result<Dyadic> {
    if q == 0 || q > p.n() {
        return Err(TribesError::InvalidArgument(format!(
            "position {q} outside 1..={}",
            p.n()
        )));
    }
    match p.tribe_of(q) {
        Some(i) if i <= m_star => Ok(analytic_tribe_influences(p, m_star).swap_remove(i - 1)),
        _ => Ok(Dyadic::zero()),
    }
}

/// `sum_{i <= m} 2^{-k_i} - alpha / 8`, with the sum taken exactly.
pub fn claim1_margin(p: &TribePartition, alpha_value: f64) -> f64 {
    let sum = p
        .sizes()
        .iter()
        .map(|&k| Dyadic::pow2_neg(k as u64).expect("positive size"))
        .fold(Dyadic::zero(), |acc, d| &acc + &d);
    sum.to_f64() - alpha_value / 8.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckName {
    ExpectationLower,
    ExpectationUpper,
    InfluenceStrict,
    MStarMinimality,
    Claim1,
}

impl CheckName {
    pub const ALL: [CheckName; 5] = [
        CheckName::ExpectationLower,
        CheckName::ExpectationUpper,
        CheckName::InfluenceStrict,
        CheckName::MStarMinimality,
        CheckName::Claim1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::ExpectationLower => "expectation-lower",
            CheckName::ExpectationUpper => "expectation-upper",
            CheckName::InfluenceStrict => "influence-strict",
            CheckName::MStarMinimality => "m-star-minimality",
            CheckName::Claim1 => "claim1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// How far a check is from failing. Positive (or zero, for the
/// non-strict checks) means it holds.
#[derive(Clone, Debug, PartialEq)]
pub enum Margin {
    Exact(Rational),
    Approx(f64),
}

impl Margin {
    pub fn to_f64(&self) -> f64 {
        match self {
            Margin::Exact(r) => r.to_f64(),
            Margin::Approx(f) => *f,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    pub name: CheckName,
    pub pass: bool,
    pub margin: Margin,
}

/// Inputs the five checks are evaluated from. Both the analytic report and
/// the truth-table oracle produce one of these.
#[derive(Clone, Debug)]
pub struct CheckInputs<'a> {
    pub bounds: &'a BoundSequence,
    pub mu: &'a Rational,
    /// `E[f]` for the full `m*`-tribe function.
    pub expectation: &'a Dyadic,
    /// `E[f]` for the first `m* - 1` tribes (zero when `m* = 1`).
    pub prefix_expectation: &'a Dyadic,
    /// Influence of every original variable.
    pub influences: &'a [Dyadic],
    pub claim1_margin: f64,
}

pub fn evaluate_checks(inputs: &CheckInputs<'_>) -> Vec<TheoremCheck> {
    let mu = inputs.mu;
    let expectation = Rational::from(inputs.expectation);

    let lower = &expectation - mu;
    let quarter = Rational::new(1, 4).unwrap();
    let ceiling = &(&Rational::new(3, 4).unwrap() * mu) + &quarter;
    let upper = &ceiling - &expectation;

    // Smallest a_j - Inf_j; any non-positive gap fails.
    let influence_gap = inputs
        .bounds
        .values()
        .iter()
        .zip(inputs.influences)
        .map(|(a, inf)| a - &Rational::from(inf))
        .min();
    let influence_ok = inputs.influences.len() == inputs.bounds.len()
        && influence_gap.as_ref().is_some_and(Rational::is_positive);

    // prod_{i < m*} (1 - 2^{-k_i}) > 1 - mu  <=>  E[prefix] < mu.
    let minimality = mu - &Rational::from(inputs.prefix_expectation);

    vec![
        TheoremCheck {
            name: CheckName::ExpectationLower,
            pass: !lower.is_negative(),
            margin: Margin::Exact(lower),
        },
        TheoremCheck {
            name: CheckName::ExpectationUpper,
            pass: !upper.is_negative(),
            margin: Margin::Exact(upper),
        },
        TheoremCheck {
            name: CheckName::InfluenceStrict,
            pass: influence_ok,
            margin: Margin::Exact(influence_gap.unwrap_or_else(Rational::zero)),
        },
        TheoremCheck {
            name: CheckName::MStarMinimality,
            pass: minimality.is_positive(),
            margin: Margin::Exact(minimality),
        },
        TheoremCheck {
            name: CheckName::Claim1,
            pass: inputs.claim1_margin >= -FLOAT_TOLERANCE,
            margin: Margin::Approx(inputs.claim1_margin),
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructOptions {
    /// Slack allowed when testing `mu <= mu_max` for the `guaranteed` flag.
    pub tolerance: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            tolerance: FLOAT_TOLERANCE,
        }
    }
}

/// Everything the construction produces for one `(bounds, mu)` input.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionReport {
    pub bounds: BoundSequence,
    pub summary: AnalysisSummary,
    pub mu: Rational,
    /// `alpha > 0` and `mu <= mu_max`: the hypotheses that promise success.
    pub guaranteed: bool,
    pub partition: TribePartition,
    pub m_star: usize,
    pub function: TribesFunction,
    pub expectation: Dyadic,
    /// Indexed by original (0-based) variable.
    pub influences: Vec<Dyadic>,
    pub claim1_margin: f64,
    pub checks: Vec<TheoremCheck>,
}

impl ConstructionReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: CheckName) -> Option<&TheoremCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `E[f]` of the first `m* - 1` tribes.
    pub fn prefix_expectation(&self) -> Dyadic {
        analytic_expectation(&self.partition, self.m_star - 1)
    }
}

/// Runs the full pipeline: sort, partition, pick `m*`, build, evaluate.
pub fn construct(
    bounds: &BoundSequence,
    mu: &Rational,
    opts: ConstructOptions,
) -> Result<ConstructionReport> {
    check_mu(mu)?;
    let summary = AnalysisSummary::of(bounds);
    let guaranteed = summary.feasible && mu.to_f64() <= summary.mu_max + opts.tolerance;

    let sorted = sort_bounds(bounds);
    let partition = partition(&sorted);
    let m_star = select_m_star(&partition, mu)?;
    let function = build(&partition, m_star, &sorted)?;

    let expectation = analytic_expectation(&partition, m_star);
    let per_tribe = analytic_tribe_influences(&partition, m_star);
    let mut influences = vec![Dyadic::zero(); bounds.len()];
    for (i, range) in function.tribe_ranges().enumerate() {
        for q in range {
            influences[function.var_map()[q]] = per_tribe[i].clone();
        }
    }
    let claim1 = claim1_margin(&partition, summary.alpha);

    let mut report = ConstructionReport {
        bounds: bounds.clone(),
        summary,
        mu: mu.clone(),
        guaranteed,
        partition,
        m_star,
        function,
        expectation,
        influences,
        claim1_margin: claim1,
        checks: Vec::new(),
    };
    report.checks = check_theorem(&report, bounds, mu);
    Ok(report)
}

/// Evaluates the five named checks from the report's analytic values.
pub fn check_theorem(
    report: &ConstructionReport,
    bounds: &BoundSequence,
    mu: &Rational,
) -> Vec<TheoremCheck> {
    evaluate_checks(&CheckInputs {
        bounds,
        mu,
        expectation: &report.expectation,
        prefix_expectation: &report.prefix_expectation(),
        influences: &report.influences,
        claim1_margin: report.claim1_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(xs: &[&str]) -> BoundSequence {
        BoundSequence::from_decimals(xs).unwrap()
    }

    fn q(s: &str) -> Rational {
        Rational::parse_decimal(s).unwrap()
    }

    fn part(sizes: &[usize], n: usize) -> TribePartition {
        TribePartition::from_sizes(sizes.to_vec(), n).unwrap()
    }

    #[test]
    fn sort_records_permutation() {
        let sb = sort_bounds(&bounds(&["0.3", "1", "0.5"]));
        assert_eq!(sb.sorted(), &[q("1"), q("0.5"), q("0.3")]);
        assert_eq!(sb.perm(), &[1, 2, 0]);
        assert_eq!(sort_bounds(&bounds(&["1", "0.5", "0.1"])).perm(), &[0, 1, 2]);
        assert_eq!(sort_bounds(&bounds(&["0.5", "0.50"])).perm(), &[0, 1]);
        let ties = sort_bounds(&bounds(&["0.2", "0.5", "0.2", "0.5"]));
        assert_eq!(ties.perm(), &[1, 3, 0, 2]);
    }

    #[test]
    fn partition_examples() {
        let p = partition(&sort_bounds(&bounds(&["1", "1", "1", "1"])));
        assert_eq!((p.sizes(), p.m(), p.residual()), (&[2, 2][..], 2, 1));
        let p = partition(&sort_bounds(&bounds(&["0.5", "0.5", "0.5"])));
        assert_eq!((p.sizes(), p.m(), p.residual()), (&[3][..], 1, 1));
        let p = partition(&sort_bounds(&bounds(&["0.3"])));
        assert_eq!((p.sizes(), p.m(), p.residual()), (&[][..], 0, 2));
    }

    #[test]
    fn partition_tracks_prefix_sums_and_tribes() {
        let p = part(&[2, 3, 3], 10);
        assert_eq!(
            (0..=3).map(|i| p.prefix_sum(i)).collect::<Vec<_>>(),
            vec![0, 2, 5, 8]
        );
        assert_eq!(p.residual(), 3);
        assert_eq!(p.tribe_positions(2), 2..5);
        let tribes: Vec<_> = (1..=10).map(|q| p.tribe_of(q)).collect();
        assert_eq!(
            tribes,
            vec![
                Some(1),
                Some(1),
                Some(2),
                Some(2),
                Some(2),
                Some(3),
                Some(3),
                Some(3),
                None,
                None
            ]
        );
        assert!(TribePartition::from_sizes(vec![3, 3], 5).is_err());
        assert!(TribePartition::from_sizes(vec![0], 5).is_err());
    }

    #[test]
    fn m_star_examples() {
        let p = part(&[2, 2], 4);
        assert_eq!(select_m_star(&p, &q("0.25")).unwrap(), 1);
        assert_eq!(select_m_star(&p, &q("0.3")).unwrap(), 2);
        assert!(matches!(
            select_m_star(&part(&[2], 2), &q("0.5")),
            Err(TribesError::MuNotAchievable { .. })
        ));
        assert_eq!(
            select_m_star(&part(&[], 1), &q("0.1")),
            Err(TribesError::ConstructionInfeasible)
        );
        for bad in ["0", "1", "-0.2", "1.5"] {
            assert!(matches!(
                select_m_star(&p, &q(bad)),
                Err(TribesError::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn build_examples() {
        let sb = sort_bounds(&bounds(&["1", "1", "1", "1"]));
        let p = part(&[2, 2], 4);
        let f = build(&p, 1, &sb).unwrap();
        assert_eq!((f.tribe_sizes(), f.var_map(), f.n()), (&[2][..], &[0, 1][..], 4));
        let f = build(&p, 2, &sb).unwrap();
        assert_eq!(f.var_map(), &[0, 1, 2, 3]);
        assert!(build(&p, 0, &sb).is_err());
        assert!(build(&p, 3, &sb).is_err());

        let sb = sort_bounds(&bounds(&["0.3", "1", "0.5"]));
        let f = build(&part(&[3], 3), 1, &sb).unwrap();
        assert_eq!(f.var_map(), &[1, 2, 0]);
    }

    #[test]
    fn analytic_expectation_examples() {
        assert_eq!(analytic_expectation(&part(&[2], 2), 1), Dyadic::new(1, 2));
        assert_eq!(analytic_expectation(&part(&[2, 2], 4), 2), Dyadic::new(7, 4));
        assert_eq!(analytic_expectation(&part(&[2, 3], 5), 2), Dyadic::new(11, 5));
        assert_eq!(analytic_expectation(&part(&[2, 3], 5), 0), Dyadic::zero());
    }

    #[test]
    fn analytic_influence_examples() {
        assert_eq!(analytic_influence(&part(&[2], 2), 1, 1).unwrap(), Dyadic::new(1, 1));
        let p = part(&[2, 2], 5);
        assert_eq!(analytic_influence(&p, 2, 1).unwrap(), Dyadic::new(3, 3));
        assert_eq!(analytic_influence(&p, 2, 5).unwrap(), Dyadic::zero());
        assert_eq!(analytic_influence(&p, 1, 3).unwrap(), Dyadic::zero());
        assert!(analytic_influence(&p, 2, 0).is_err());
        assert!(analytic_influence(&p, 2, 6).is_err());
        // 2^{-2} * 3/4 * 7/8 for the middle tribe of [2, 3, 3].
        let p = part(&[2, 3, 3], 8);
        assert_eq!(analytic_influence(&p, 3, 4).unwrap(), Dyadic::new(3 * 7 * 2, 2 + 2 + 3 + 1));
    }

    #[test]
    fn claim1_examples() {
        assert!((claim1_margin(&part(&[2, 2], 4), 2.613706) - 0.173287).abs() < 1e-5);
        assert_eq!(claim1_margin(&part(&[], 1), -0.8), 0.1);
        assert!((claim1_margin(&part(&[3], 3), 0.1) - 0.1125).abs() < 1e-15);
    }

    #[test]
    fn construct_example_a() {
        let r = construct(&bounds(&["1", "1", "1", "1"]), &q("0.25"), Default::default()).unwrap();
        assert_eq!(r.partition.sizes(), &[2, 2]);
        assert_eq!(r.m_star, 1);
        assert_eq!(r.function.var_map(), &[0, 1]);
        assert_eq!(r.expectation, Dyadic::new(1, 2));
        let half = Dyadic::new(1, 1);
        assert_eq!(r.influences, vec![half.clone(), half, Dyadic::zero(), Dyadic::zero()]);
        assert!(r.guaranteed);
        assert!((r.summary.mu_max - 0.2787).abs() < 1e-4);
        assert!(r.all_checks_pass());
        let lower = r.check(CheckName::ExpectationLower).unwrap();
        assert_eq!(lower.margin, Margin::Exact(Rational::zero()));
    }

    #[test]
    fn construct_example_unguaranteed() {
        let b = bounds(&["1", "0.4", "0.3", "0.2", "0.1"]);
        let r = construct(&b, &q("0.1"), Default::default()).unwrap();
        assert!((r.summary.talagrand_sum - 1.36522).abs() < 1e-5);
        assert!((r.summary.alpha - (-0.0211)).abs() < 1e-4);
        assert!(!r.guaranteed);
        assert_eq!(r.partition.sizes(), &[3]);
        assert_eq!(r.m_star, 1);
        assert_eq!(r.expectation, Dyadic::new(1, 3));
        let quarter = Dyadic::new(1, 2);
        assert_eq!(
            r.influences,
            vec![quarter.clone(), quarter.clone(), quarter, Dyadic::zero(), Dyadic::zero()]
        );
        assert!(r.all_checks_pass());
    }

    #[test]
    fn construct_infeasible() {
        assert_eq!(
            construct(&bounds(&["0.3"]), &q("0.1"), Default::default()),
            Err(TribesError::ConstructionInfeasible)
        );
    }

    #[test]
    fn strict_influence_fails_at_equality() {
        // A dictator x_1 under budget a_1 = 1 has Inf = 1, not < 1.
        let b = bounds(&["1"]);
        let checks = evaluate_checks(&CheckInputs {
            bounds: &b,
            mu: &q("0.5"),
            expectation: &Dyadic::new(1, 1),
            prefix_expectation: &Dyadic::zero(),
            influences: &[Dyadic::one()],
            claim1_margin: 0.0,
        });
        let strict = checks.iter().find(|c| c.name == CheckName::InfluenceStrict).unwrap();
        assert!(!strict.pass);
        assert_eq!(strict.margin, Margin::Exact(Rational::zero()));
    }

    #[test]
    fn claim1_check_passes_on_empty_partition() {
        let margin = claim1_margin(&part(&[], 1), -0.5);
        assert!(margin > 0.0);
        let b = bounds(&["0.3"]);
        let checks = evaluate_checks(&CheckInputs {
            bounds: &b,
            mu: &q("0.1"),
            expectation: &Dyadic::zero(),
            prefix_expectation: &Dyadic::zero(),
            influences: &[Dyadic::zero()],
            claim1_margin: margin,
        });
        assert!(checks.iter().find(|c| c.name == CheckName::Claim1).unwrap().pass);
    }

    #[test]
    fn check_names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(CheckName::parse(c.as_str()), Some(c));
        }
        assert_eq!(CheckName::parse("nope"), None);
    }
}
