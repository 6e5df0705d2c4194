//! Group-specific randomized thresholds that enforce demographic parity or
//! equalized odds while minimizing expected misclassification cost.
//!
//! The objective for per-group operating points `(fpr_a, tpr_a)` is
//!
//! ```text
//! sum_a w_a * [cost_fp(a) * P(Y=0 | a) * fpr_a + cost_fn(a) * P(Y=1 | a) * (1 - tpr_a)]
//! ```
//!
//! with `w_a` the group weights of the [`CostModel`].

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point, GEOMETRY_EPS};
use crate::metrics::{max_pairwise_gap, GroupId, LabeledPredictions};
use crate::rng::CounterUniform;
use crate::roc::{
    hull_intersection, realize_point, upper_hull, GroupSweep, MixturePolicy, RocCurve, RocHull,
    ScoreSet,
};

/// Tolerance for equal objective values when breaking ties.
const OBJECTIVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    None,
    DemographicParity,
    EqualizedOdds,
}

impl Constraint {
    pub fn as_str(self) -> &'static str {
        match self {
            Constraint::None => "none",
            Constraint::DemographicParity => "demographic_parity",
            Constraint::EqualizedOdds => "equalized_odds",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Constraint::None),
            "demographic_parity" => Some(Constraint::DemographicParity),
            "equalized_odds" => Some(Constraint::EqualizedOdds),
            _ => None,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-group error costs and aggregation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    cost_fp: Vec<f64>,
    cost_fn: Vec<f64>,
    group_weights: Vec<f64>,
}

impl CostModel {
    pub fn new(cost_fp: Vec<f64>, cost_fn: Vec<f64>, group_weights: Vec<f64>) -> Result<Self> {
        let g = group_weights.len();
        if g < 2 || cost_fp.len() != g || cost_fn.len() != g {
            return Err(Error::invalid(
                "cost model needs one fp cost, fn cost and weight per group (>= 2 groups)",
            ));
        }
        let all = cost_fp.iter().chain(&cost_fn);
        if all.clone().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("costs must be finite and non-negative"));
        }
        if all.clone().all(|&c| c == 0.0) {
            return Err(Error::invalid("at least one cost must be positive"));
        }
        if group_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("group weights must be non-negative"));
        }
        let total: f64 = group_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "group weights must sum to 1, got {total}"
            )));
        }
        Ok(CostModel {
            cost_fp,
            cost_fn,
            group_weights,
        })
    }

    /// Same costs for every group, weighted by population share.
    pub fn uniform(cost_fp: f64, cost_fn: f64, scores: &ScoreSet) -> Result<Self> {
        let g = scores.num_groups();
        Self::new(
            vec![cost_fp; g],
            vec![cost_fn; g],
            scores.group_proportions(),
        )
    }

    /// Plain error rate: unit costs, population weights.
    pub fn accuracy(scores: &ScoreSet) -> Result<Self> {
        Self::uniform(1.0, 1.0, scores)
    }

    pub fn num_groups(&self) -> usize {
        self.group_weights.len()
    }

    pub fn cost_fp(&self) -> &[f64] {
        &self.cost_fp
    }

    pub fn cost_fn(&self) -> &[f64] {
        &self.cost_fn
    }

    pub fn group_weights(&self) -> &[f64] {
        &self.group_weights
    }

    /// Unweighted expected cost per member of group `g` given its confusion
    /// counts.
    fn member_cost(&self, g: usize, fp: f64, fn_: f64, size: f64) -> f64 {
        (self.cost_fp[g] * fp + self.cost_fn[g] * fn_) / size
    }
}

/// Expected per-group rates of a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub selection_rate: f64,
    /// `None` when the group has no negatives.
    pub fpr: Option<f64>,
    /// `None` when the group has no positives.
    pub tpr: Option<f64>,
}

/// Per-group mixture policies plus what they achieve in expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct FairPolicy {
    pub policies: Vec<MixturePolicy>,
    pub constraint: Constraint,
    pub achieved: Vec<OperatingPoint>,
    pub objective_value: f64,
    /// Set when the feasible region collapsed onto the chance diagonal.
    pub degenerate: bool,
}

impl FairPolicy {
    pub fn num_groups(&self) -> usize {
        self.policies.len()
    }

    pub fn policy(&self, g: GroupId) -> Result<&MixturePolicy> {
        self.policies.get(g.0).ok_or(Error::UnknownGroup(g.0))
    }

    /// Demographic parity gap of the expected selection rates.
    pub fn analytic_dp_difference(&self) -> f64 {
        let sel: Vec<f64> = self.achieved.iter().map(|a| a.selection_rate).collect();
        max_pairwise_gap(&sel)
    }

    /// Equalized odds gap of the expected rates; `None` if any group lacks a
    /// class.
    pub fn analytic_eo_difference(&self) -> Option<f64> {
        let fpr: Option<Vec<f64>> = self.achieved.iter().map(|a| a.fpr).collect();
        let tpr: Option<Vec<f64>> = self.achieved.iter().map(|a| a.tpr).collect();
        Some(max_pairwise_gap(&fpr?).max(max_pairwise_gap(&tpr?)))
    }
}

fn sweeps(scores: &ScoreSet) -> Result<Vec<GroupSweep>> {
    scores
        .group_ids()
        .map(|g| GroupSweep::new(scores, g))
        .collect()
}

fn check_cost(cost: &CostModel, scores: &ScoreSet) -> Result<()> {
    if cost.num_groups() != scores.num_groups() {
        return Err(Error::Domain(format!(
            "cost model has {} groups, scores have {}",
            cost.num_groups(),
            scores.num_groups()
        )));
    }
    Ok(())
}

/// Expected rates of a policy on one group, by exact counting.
fn expected_point_on(sweep: &GroupSweep, policy: &MixturePolicy) -> OperatingPoint {
    let (mut fp, mut tp) = (0.0, 0.0);
    for (t, w) in policy.components() {
        let (f, p) = sweep.counts[sweep.index_of(t)];
        fp += w * f as f64;
        tp += w * p as f64;
    }
    OperatingPoint {
        selection_rate: (fp + tp) / sweep.size() as f64,
        fpr: (sweep.negatives > 0).then(|| fp / sweep.negatives as f64),
        tpr: (sweep.positives > 0).then(|| tp / sweep.positives as f64),
    }
}

fn objective(cost: &CostModel, sweeps: &[GroupSweep], policies: &[MixturePolicy]) -> f64 {
    sweeps
        .iter()
        .zip(policies)
        .enumerate()
        .map(|(g, (sw, pol))| {
            let (mut fp, mut tp) = (0.0, 0.0);
            for (t, w) in pol.components() {
                let (f, p) = sw.counts[sw.index_of(t)];
                fp += w * f as f64;
                tp += w * p as f64;
            }
            let fn_ = sw.positives as f64 - tp;
            cost.group_weights[g] * cost.member_cost(g, fp, fn_, sw.size() as f64)
        })
        .sum()
}

fn assemble(
    constraint: Constraint,
    cost: &CostModel,
    sweeps: &[GroupSweep],
    policies: Vec<MixturePolicy>,
    degenerate: bool,
) -> FairPolicy {
    let achieved = sweeps
        .iter()
        .zip(&policies)
        .map(|(sw, p)| expected_point_on(sw, p))
        .collect();
    FairPolicy {
        objective_value: objective(cost, sweeps, &policies),
        policies,
        constraint,
        achieved,
        degenerate,
    }
}

/// Fraction of each group whose score lies in the policy's random interval.
pub fn randomization_width(policy: &FairPolicy, scores: &ScoreSet) -> Result<Vec<f64>> {
    if policy.num_groups() != scores.num_groups() {
        return Err(Error::Domain(format!(
            "policy covers {} groups, scores have {}",
            policy.num_groups(),
            scores.num_groups()
        )));
    }
    let mut inside = vec![0u64; scores.num_groups()];
    let mut total = vec![0u64; scores.num_groups()];
    let intervals: Vec<(f64, f64)> = policy
        .policies
        .iter()
        .map(|p| p.random_interval())
        .collect();
    for (&s, g) in scores.scores().iter().zip(scores.groups()) {
        total[g.0] += 1;
        let (lo, hi) = intervals[g.0];
        if s > lo && s <= hi {
            inside[g.0] += 1;
        }
    }
    Ok(inside
        .iter()
        .zip(&total)
        .map(|(&i, &t)| if t == 0 { 0.0 } else { i as f64 / t as f64 })
        .collect())
}

fn sweep_width(sweep: &GroupSweep, policy: &MixturePolicy) -> f64 {
    let (lo, hi) = policy.random_interval();
    if lo >= hi {
        return 0.0;
    }
    let (a, b) = (
        sweep.counts[sweep.index_of(hi)],
        sweep.counts[sweep.index_of(lo)],
    );
    ((b.0 + b.1) - (a.0 + a.1)) as f64 / sweep.size() as f64
}

/// Policy on a group's sweep that selects exactly fraction `s`, randomizing
/// only within one score level.
fn policy_at_rate(sweep: &GroupSweep, s: f64) -> MixturePolicy {
    let k_max = sweep.levels.len();
    // largest k with sel_k <= s
    let mut lo = 0usize;
    let mut hi = k_max;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if sweep.selection_rate(mid) <= s {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let k = lo;
    let sel_k = sweep.selection_rate(k);
    if sel_k == s || k == k_max {
        return MixturePolicy::deterministic(sweep.threshold(k));
    }
    let sel_next = sweep.selection_rate(k + 1);
    let p = ((s - sel_k) / (sel_next - sel_k)).clamp(0.0, 1.0);
    MixturePolicy {
        t_low: sweep.threshold(k + 1),
        t_high: sweep.threshold(k),
        p,
        constant: None,
    }
}

/// Equal selection rate in every group, at the cost-minimizing common rate
/// or at `budget` when given.
pub fn fit_demographic_parity(
    scores: &ScoreSet,
    cost: &CostModel,
    budget: Option<f64>,
) -> Result<FairPolicy> {
    check_cost(cost, scores)?;
    let sweeps = sweeps(scores)?;
    if let Some(b) = budget {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::Domain(format!("budget {b} outside [0, 1]")));
        }
        let policies = sweeps.iter().map(|sw| policy_at_rate(sw, b)).collect();
        return Ok(assemble(
            Constraint::DemographicParity,
            cost,
            &sweeps,
            policies,
            false,
        ));
    }

    // Total cost is piecewise linear in the common rate with breakpoints at
    // every group's deterministic selection rates.
    let mut candidates: Vec<f64> = sweeps
        .iter()
        .flat_map(|sw| (0..=sw.levels.len()).map(move |k| sw.selection_rate(k)))
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best: Option<(f64, f64, f64, Vec<MixturePolicy>)> = None;
    for &s in &candidates {
        let policies: Vec<MixturePolicy> = sweeps.iter().map(|sw| policy_at_rate(sw, s)).collect();
        let obj = objective(cost, &sweeps, &policies);
        let width: f64 = sweeps
            .iter()
            .zip(&policies)
            .map(|(sw, p)| sweep_width(sw, p))
            .sum();
        let better = match &best {
            None => true,
            Some((b_obj, b_width, _, _)) => {
                obj < b_obj - OBJECTIVE_EPS
                    || ((obj - b_obj).abs() <= OBJECTIVE_EPS && width < b_width - OBJECTIVE_EPS)
            }
        };
        if better {
            best = Some((obj, width, s, policies));
        }
    }
    let (_, _, _, policies) = best.expect("at least the rates 0 and 1 are candidates");
    Ok(assemble(
        Constraint::DemographicParity,
        cost,
        &sweeps,
        policies,
        false,
    ))
}

/// Per-group ROC geometry used by the equalized odds fit.
#[derive(Debug, Clone)]
pub struct GroupGeometry {
    pub curve: RocCurve,
    pub hull: RocHull,
}

pub fn group_geometry(scores: &ScoreSet) -> Result<Vec<GroupGeometry>> {
    scores
        .group_ids()
        .map(|g| {
            let sweep = GroupSweep::new(scores, g)?;
            let curve = RocCurve::from_sweep(&sweep, g)?;
            let hull = upper_hull(&curve);
            Ok(GroupGeometry { curve, hull })
        })
        .collect()
}

/// Objective of every group sitting at the common point `p`.
pub fn common_point_cost(cost: &CostModel, scores: &ScoreSet, p: Point) -> f64 {
    scores
        .group_counts()
        .iter()
        .enumerate()
        .map(|(g, &(size, pos))| {
            let size = size as f64;
            let pos = pos as f64;
            let fp = (size - pos) * p.x;
            let fn_ = pos * (1.0 - p.y);
            cost.group_weights[g] * cost.member_cost(g, fp, fn_, size)
        })
        .sum()
}

/// Common `(fpr, tpr)` for all groups at minimum expected cost, realized
/// per group by randomized thresholds.
pub fn fit_equalized_odds(scores: &ScoreSet, cost: &CostModel) -> Result<FairPolicy> {
    check_cost(cost, scores)?;
    let geometry = group_geometry(scores)?;
    let hulls: Vec<RocHull> = geometry.iter().map(|g| g.hull.clone()).collect();
    let region = hull_intersection(&hulls)?;
    let sweeps = sweeps(scores)?;
    let (policies, degenerate) = best_common_point(scores, cost, &sweeps, &hulls, &region)?;
    Ok(assemble(
        Constraint::EqualizedOdds,
        cost,
        &sweeps,
        policies,
        degenerate,
    ))
}

fn best_common_point(
    scores: &ScoreSet,
    cost: &CostModel,
    sweeps: &[GroupSweep],
    hulls: &[RocHull],
    region: &ConvexPolygon,
) -> Result<(Vec<MixturePolicy>, bool)> {
    let degenerate = region.area().abs() <= GEOMETRY_EPS;
    // A linear objective over a convex polygon is minimized at a vertex.
    let mut best: Option<(f64, f64, f64, Vec<MixturePolicy>)> = None;
    for &v in region.vertices() {
        let v = Point::new(v.x.clamp(0.0, 1.0), v.y.clamp(0.0, 1.0));
        let obj = common_point_cost(cost, scores, v);
        if let Some((b_obj, ..)) = &best {
            if obj > b_obj + OBJECTIVE_EPS {
                continue;
            }
        }
        let policies = hulls
            .iter()
            .map(|h| realize_point(h, (v.x, v.y)))
            .collect::<Result<Vec<_>>>()?;
        let width: f64 = sweeps
            .iter()
            .zip(&policies)
            .map(|(sw, p)| sweep_width(sw, p))
            .sum();
        let better = match &best {
            None => true,
            Some((b_obj, b_width, b_fpr, _)) => {
                obj < b_obj - OBJECTIVE_EPS
                    || ((obj - b_obj).abs() <= OBJECTIVE_EPS
                        && (width < b_width - OBJECTIVE_EPS
                            || ((width - b_width).abs() <= OBJECTIVE_EPS && v.x < *b_fpr)))
            }
        };
        if better {
            best = Some((obj, width, v.x, policies));
        }
    }
    let (_, _, _, policies) =
        best.ok_or_else(|| Error::Domain("empty equalized odds region".into()))?;
    Ok((policies, degenerate))
}

/// Cost-optimal deterministic threshold for each group separately.
pub fn fit_unconstrained(scores: &ScoreSet, cost: &CostModel) -> Result<FairPolicy> {
    check_cost(cost, scores)?;
    let sweeps = sweeps(scores)?;
    let policies = sweeps
        .iter()
        .enumerate()
        .map(|(g, sw)| {
            let mut best = (f64::INFINITY, 0usize);
            for (k, &(fp, tp)) in sw.counts.iter().enumerate() {
                let c =
                    cost.member_cost(g, fp as f64, (sw.positives - tp) as f64, sw.size() as f64);
                if c < best.0 - OBJECTIVE_EPS {
                    best = (c, k);
                }
            }
            MixturePolicy::deterministic(sw.threshold(best.1))
        })
        .collect();
    Ok(assemble(Constraint::None, cost, &sweeps, policies, false))
}

/// One group-blind threshold. Without a budget it minimizes the objective;
/// with a budget it selects exactly that fraction of the whole population
/// (top scores first, ties randomized).
pub fn fit_shared_threshold(
    scores: &ScoreSet,
    cost: &CostModel,
    budget: Option<f64>,
) -> Result<FairPolicy> {
    check_cost(cost, scores)?;
    let sweeps = sweeps(scores)?;
    let pooled = GroupSweep::from_samples(
        scores
            .scores()
            .iter()
            .copied()
            .zip(scores.labels().iter().copied())
            .collect(),
    )
    .ok_or_else(|| Error::invalid("no samples"))?;

    let shared = match budget {
        Some(b) => {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::Domain(format!("budget {b} outside [0, 1]")));
            }
            policy_at_rate(&pooled, b)
        }
        None => {
            let mut best: Option<(f64, MixturePolicy)> = None;
            for k in 0..=pooled.levels.len() {
                let p = MixturePolicy::deterministic(pooled.threshold(k));
                let obj = objective(cost, &sweeps, &vec![p; sweeps.len()]);
                if best.as_ref().map_or(true, |(b, _)| obj < b - OBJECTIVE_EPS) {
                    best = Some((obj, p));
                }
            }
            best.expect("pooled sweep has at least one threshold").1
        }
    };
    Ok(assemble(
        Constraint::None,
        cost,
        &sweeps,
        vec![shared; sweeps.len()],
        false,
    ))
}

/// Dispatches to the fit for `constraint`.
pub fn fit(
    constraint: Constraint,
    scores: &ScoreSet,
    cost: &CostModel,
    budget: Option<f64>,
) -> Result<FairPolicy> {
    match (constraint, budget) {
        (Constraint::DemographicParity, b) => fit_demographic_parity(scores, cost, b),
        (Constraint::EqualizedOdds, None) => fit_equalized_odds(scores, cost),
        (Constraint::None, None) => fit_unconstrained(scores, cost),
        (Constraint::None, Some(b)) => fit_shared_threshold(scores, cost, Some(b)),
        (Constraint::EqualizedOdds, Some(_)) => Err(Error::Domain(
            "a selection budget is only supported with demographic parity".into(),
        )),
    }
}

/// Expected per-group rates of `policy` on `scores`.
pub fn expected_rates(policy: &FairPolicy, scores: &ScoreSet) -> Result<Vec<OperatingPoint>> {
    if policy.num_groups() != scores.num_groups() {
        return Err(Error::Domain("policy and scores disagree on groups".into()));
    }
    let sweeps = sweeps(scores)?;
    Ok(sweeps
        .iter()
        .zip(&policy.policies)
        .map(|(sw, p)| expected_point_on(sw, p))
        .collect())
}

/// Seeded predictions: sample `i` draws its threshold with the uniform keyed
/// by `(seed, i)`.
pub fn apply_policy(
    policy: &FairPolicy,
    scores: &ScoreSet,
    seed: u64,
) -> Result<LabeledPredictions> {
    let mut draws = CounterUniform::new(seed);
    let mut predictions = Vec::with_capacity(scores.len());
    for (i, (&s, g)) in scores.scores().iter().zip(scores.groups()).enumerate() {
        let mixture = policy.policy(*g)?;
        predictions.push(mixture.predict(s, draws.at(i as u64)));
    }
    LabeledPredictions::new(
        scores.groups().to_vec(),
        scores.labels().to_vec(),
        predictions,
        scores.num_groups(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{confusion_stats, demographic_parity_difference};

    fn set(rows: &[(usize, f64, bool)]) -> ScoreSet {
        let g = rows.iter().map(|r| r.0).max().unwrap() + 1;
        ScoreSet::new(
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.2).collect(),
            rows.iter().map(|r| GroupId(r.0)).collect(),
            g.max(2),
        )
        .unwrap()
    }

    fn symmetric() -> ScoreSet {
        let base = [
            (0.9, true),
            (0.7, true),
            (0.6, false),
            (0.4, true),
            (0.2, false),
            (0.1, false),
        ];
        let mut rows = Vec::new();
        for g in 0..2 {
            rows.extend(base.iter().map(|&(s, y)| (g, s, y)));
        }
        set(&rows)
    }

    #[test]
    fn cost_model_validation() {
        assert!(CostModel::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]).is_ok());
        assert!(CostModel::new(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(CostModel::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(CostModel::new(vec![-1.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(CostModel::new(vec![1.0], vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn dp_symmetric_groups_get_equal_deterministic_thresholds() {
        let s = symmetric();
        let cost = CostModel::accuracy(&s).unwrap();
        let f = fit_demographic_parity(&s, &cost, None).unwrap();
        assert_eq!(f.policies[0], f.policies[1]);
        assert!(f.policies[0].is_deterministic());
        assert_eq!(f.analytic_dp_difference(), 0.0);
    }

    #[test]
    fn dp_zero_budget_selects_nobody() {
        let s = symmetric();
        let cost = CostModel::accuracy(&s).unwrap();
        let f = fit_demographic_parity(&s, &cost, Some(0.0)).unwrap();
        for a in &f.achieved {
            assert_eq!(a.selection_rate, 0.0);
        }
        let preds = apply_policy(&f, &s, 1).unwrap();
        assert!(preds.predictions().iter().all(|p| !p));
    }

    #[test]
    fn dp_budget_outside_unit_interval_is_domain_error() {
        let s = symmetric();
        let cost = CostModel::accuracy(&s).unwrap();
        assert!(matches!(
            fit_demographic_parity(&s, &cost, Some(1.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dp_randomizes_only_one_level() {
        let s = set(&[
            (0, 0.9, true),
            (0, 0.8, true),
            (0, 0.3, false),
            (0, 0.2, false),
            (1, 0.9, true),
            (1, 0.5, false),
            (1, 0.4, false),
        ]);
        let cost = CostModel::accuracy(&s).unwrap();
        let f = fit_demographic_parity(&s, &cost, Some(0.6)).unwrap();
        assert!(f.analytic_dp_difference() <= 1e-12);
        let w = randomization_width(&f, &s).unwrap();
        // group 0: 0.6 * 4 = 2.4 -> randomize the single 0.3 level
        assert!((w[0] - 0.25).abs() < 1e-12);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn eo_identical_groups_use_unconstrained_threshold() {
        let s = symmetric();
        let cost = CostModel::accuracy(&s).unwrap();
        let eo = fit_equalized_odds(&s, &cost).unwrap();
        let un = fit_unconstrained(&s, &cost).unwrap();
        assert_eq!(eo.policies, un.policies);
        assert!(eo.policies.iter().all(|p| p.is_deterministic()));
        assert!((eo.objective_value - un.objective_value).abs() < 1e-12);
        assert!(!eo.degenerate);
    }

    #[test]
    fn eo_degenerate_region_is_flagged() {
        // group 1 scores carry no information: its hull is the diagonal
        let s = set(&[
            (0, 0.9, true),
            (0, 0.1, false),
            (1, 0.5, true),
            (1, 0.5, false),
        ]);
        let cost = CostModel::accuracy(&s).unwrap();
        let eo = fit_equalized_odds(&s, &cost).unwrap();
        assert!(eo.degenerate);
        assert!(eo.analytic_eo_difference().unwrap() <= 1e-12);
    }

    #[test]
    fn deterministic_mixture_matches_plain_threshold() {
        let s = symmetric();
        let f = FairPolicy {
            policies: vec![MixturePolicy::deterministic(0.5); 2],
            constraint: Constraint::None,
            achieved: vec![],
            objective_value: 0.0,
            degenerate: false,
        };
        let preds = apply_policy(&f, &s, 3).unwrap();
        for (p, &sc) in preds.predictions().iter().zip(s.scores()) {
            assert_eq!(*p, sc > 0.5);
        }
        assert_eq!(randomization_width(&f, &s).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn full_width_policy_randomizes_everyone() {
        let s = symmetric();
        let f = FairPolicy {
            policies: vec![MixturePolicy::new(f64::NEG_INFINITY, f64::INFINITY, 0.5).unwrap(); 2],
            constraint: Constraint::None,
            achieved: vec![],
            objective_value: 0.0,
            degenerate: false,
        };
        assert_eq!(randomization_width(&f, &s).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn apply_is_deterministic_and_checks_groups() {
        let s = symmetric();
        let cost = CostModel::accuracy(&s).unwrap();
        let f = fit_demographic_parity(&s, &cost, Some(0.3)).unwrap();
        assert_eq!(
            apply_policy(&f, &s, 9).unwrap(),
            apply_policy(&f, &s, 9).unwrap()
        );
        let short = FairPolicy {
            policies: vec![MixturePolicy::deterministic(0.0)],
            ..f
        };
        assert!(matches!(
            apply_policy(&short, &s, 9),
            Err(Error::UnknownGroup(1))
        ));
    }

    #[test]
    fn shared_budget_conserves_total_selection() {
        let s = set(&[
            (0, 0.9, true),
            (0, 0.8, false),
            (0, 0.1, false),
            (1, 0.7, true),
            (1, 0.6, true),
            (1, 0.5, false),
            (1, 0.2, false),
        ]);
        let cost = CostModel::accuracy(&s).unwrap();
        let base = fit_shared_threshold(&s, &cost, Some(3.0 / 7.0)).unwrap();
        let dp = fit_demographic_parity(&s, &cost, Some(3.0 / 7.0)).unwrap();
        let total = |f: &FairPolicy| -> f64 {
            f.achieved
                .iter()
                .zip(s.group_counts())
                .map(|(a, (n, _))| a.selection_rate * n as f64)
                .sum()
        };
        assert!((total(&base) - 3.0).abs() < 1e-12);
        assert!((total(&dp) - 3.0).abs() < 1e-12);
        let preds = apply_policy(&base, &s, 0).unwrap();
        let st = confusion_stats(&preds);
        assert!(demographic_parity_difference(&st).unwrap() > 0.0);
    }

    #[test]
    fn constraint_names_round_trip() {
        for c in [
            Constraint::None,
            Constraint::DemographicParity,
            Constraint::EqualizedOdds,
        ] {
            assert_eq!(Constraint::parse(c.as_str()), Some(c));
        }
        assert_eq!(Constraint::parse("parity"), None);
    }
}
