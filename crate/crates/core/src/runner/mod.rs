//! Scenario orchestration: sample, fit, apply, measure, aggregate.

pub mod audit;
pub mod config;
pub mod policy_file;
pub mod presets;
pub mod report;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{
    confusion_stats, demographic_parity_difference, equalized_odds_difference, ConfusionStats,
    GroupId, LabeledPredictions,
};
use crate::postprocess::{
    apply_policy, fit, fit_shared_threshold, fit_unconstrained, randomization_width, Constraint,
    CostModel, FairPolicy, OperatingPoint,
};
use crate::rng::derive_seeds;
use crate::roc::{build_roc, upper_hull, ScoreSet};
use crate::spaces::Population;
use crate::utility::{aggregate_report, compare_decisions, LevelingDownReport, MeanEstimate};

pub use audit::{audit, AuditReport};
pub use config::{
    load_config, parse_config, BaselineKind, GroupCosts, OutputKind, ScenarioConfig, SCHEMA_VERSION,
};
pub use policy_file::PolicyFile;
pub use presets::{preset_text, PRESET_NAMES};
pub use report::ReportFormat;

/// Everything measured for one policy on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    pub policy: FairPolicy,
    pub dp_analytic: f64,
    pub eo_analytic: Option<f64>,
    pub dp_empirical: f64,
    pub eo_empirical: Option<f64>,
    pub empirical: Vec<OperatingPoint>,
    pub widths: Vec<f64>,
}

pub(crate) fn empirical_points(stats: &ConfusionStats) -> Result<Vec<OperatingPoint>> {
    (0..stats.num_groups())
        .map(|g| {
            let g = GroupId(g);
            Ok(OperatingPoint {
                selection_rate: stats.selection_rate(g)?,
                fpr: stats.false_positive_rate(g).ok(),
                tpr: stats.true_positive_rate(g).ok(),
            })
        })
        .collect()
}

impl PolicyEvaluation {
    pub fn new(
        policy: FairPolicy,
        scores: &ScoreSet,
        predictions: &LabeledPredictions,
    ) -> Result<Self> {
        let stats = confusion_stats(predictions);
        Ok(PolicyEvaluation {
            dp_analytic: policy.analytic_dp_difference(),
            eo_analytic: policy.analytic_eo_difference(),
            dp_empirical: demographic_parity_difference(&stats)?,
            eo_empirical: equalized_odds_difference(&stats).ok(),
            empirical: empirical_points(&stats)?,
            widths: randomization_width(&policy, scores)?,
            policy,
        })
    }
}

/// One row of plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct RocRow {
    pub group: String,
    /// `curve`, `hull`, `baseline` or `fair`.
    pub kind: &'static str,
    pub index: usize,
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub index: usize,
    pub population_seed: u64,
    pub decision_seed: u64,
    pub baseline: PolicyEvaluation,
    pub fair: PolicyEvaluation,
    pub utility: LevelingDownReport,
    /// Kept for the first replicate only, when requested.
    pub roc: Option<Vec<RocRow>>,
    /// First replicate with the constrained decisions, when requested.
    pub population: Option<Population>,
}

fn roc_rows(
    population: &Population,
    scores: &ScoreSet,
    baseline: &FairPolicy,
    fair: &FairPolicy,
) -> Result<Vec<RocRow>> {
    let mut rows = Vec::new();
    for (g, label) in population.groups().labels().iter().enumerate() {
        let curve = build_roc(scores, GroupId(g))?;
        let hull = upper_hull(&curve);
        let point = |kind, index, p: &crate::roc::RocPoint| RocRow {
            group: label.clone(),
            kind,
            index,
            fpr: p.fpr,
            tpr: p.tpr,
            threshold: Some(p.threshold),
        };
        rows.extend(
            curve
                .points()
                .iter()
                .enumerate()
                .map(|(k, p)| point("curve", k, p)),
        );
        rows.extend(
            hull.vertices()
                .iter()
                .enumerate()
                .map(|(k, p)| point("hull", k, p)),
        );
        for (kind, pol) in [("baseline", baseline), ("fair", fair)] {
            let a = &pol.achieved[g];
            rows.push(RocRow {
                group: label.clone(),
                kind,
                index: 0,
                fpr: a.fpr.unwrap_or(f64::NAN),
                tpr: a.tpr.unwrap_or(f64::NAN),
                threshold: None,
            });
        }
    }
    Ok(rows)
}

/// Runs replicate `index` with its own seed.
pub fn run_replicate(cfg: &ScenarioConfig, index: usize, seed: u64) -> Result<ReplicateResult> {
    let seeds = derive_seeds(seed, 2);
    let (population_seed, decision_seed) = (seeds[0], seeds[1]);
    let mut spec = cfg.population.clone();
    spec.seed = population_seed;
    let population = spec.sample();
    let scores = population.to_score_set();
    let cost = CostModel::new(
        cfg.cost.cost_fp.clone(),
        cfg.cost.cost_fn.clone(),
        scores.group_proportions(),
    )?;

    let baseline = match (cfg.baseline, cfg.budget) {
        (BaselineKind::GroupOptimal, None) => fit_unconstrained(&scores, &cost)?,
        (_, budget) => fit_shared_threshold(&scores, &cost, budget)?,
    };
    let fair = if cfg.constraint == Constraint::None {
        baseline.clone()
    } else {
        fit(cfg.constraint, &scores, &cost, cfg.budget)?
    };

    let base_pred = apply_policy(&baseline, &scores, decision_seed)?;
    let fair_pred = apply_policy(&fair, &scores, decision_seed)?;
    let utility = compare_decisions(
        &population,
        base_pred.predictions(),
        fair_pred.predictions(),
        &cfg.utility,
    )?;

    let first = index == 0;
    let roc = if first && cfg.wants(OutputKind::RocPoints) {
        Some(roc_rows(&population, &scores, &baseline, &fair)?)
    } else {
        None
    };
    let dump = if first && cfg.wants(OutputKind::PopulationDump) {
        Some(population.with_decisions(&fair_pred)?)
    } else {
        None
    };

    Ok(ReplicateResult {
        index,
        population_seed,
        decision_seed,
        baseline: PolicyEvaluation::new(baseline, &scores, &base_pred)?,
        fair: PolicyEvaluation::new(fair, &scores, &fair_pred)?,
        utility,
        roc,
        population: dump,
    })
}

/// A statistic aggregated over replicates. `value` is `None` when some
/// replicate left it undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub policy: &'static str,
    pub group: String,
    pub statistic: &'static str,
    pub value: Option<MeanEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub constraint: Constraint,
    pub baseline: BaselineKind,
    pub seed: u64,
    pub labels: Vec<String>,
    pub outputs: Vec<OutputKind>,
    pub reference: crate::utility::ReferenceSpace,
    pub replicates: Vec<ReplicateResult>,
    pub metrics: Vec<MetricRow>,
    /// Across replicates when there are several, otherwise the single
    /// replicate's own report.
    pub utility: LevelingDownReport,
}

fn aggregate(values: Vec<Option<f64>>) -> Option<MeanEstimate> {
    let v: Option<Vec<f64>> = values.into_iter().collect();
    MeanEstimate::from_values(v?)
}

fn metric_rows(labels: &[String], results: &[ReplicateResult]) -> Vec<MetricRow> {
    let mut rows = Vec::new();
    type Pick = fn(&ReplicateResult) -> &PolicyEvaluation;
    type Overall = fn(&PolicyEvaluation) -> Option<f64>;
    type PerGroup = fn(&PolicyEvaluation, usize) -> Option<f64>;
    let sides: [(&'static str, Pick); 2] = [("baseline", |r| &r.baseline), ("fair", |r| &r.fair)];
    for (name, side) in sides {
        let overall: [(&'static str, Overall); 6] = [
            ("dp_difference", |e| Some(e.dp_empirical)),
            ("eo_difference", |e| e.eo_empirical),
            ("dp_difference_expected", |e| Some(e.dp_analytic)),
            ("eo_difference_expected", |e| e.eo_analytic),
            ("objective", |e| Some(e.policy.objective_value)),
            ("degenerate", |e| {
                Some(if e.policy.degenerate { 1.0 } else { 0.0 })
            }),
        ];
        for (stat, f) in overall {
            rows.push(MetricRow {
                policy: name,
                group: "all".into(),
                statistic: stat,
                value: aggregate(results.iter().map(|r| f(side(r))).collect()),
            });
        }
        for (g, label) in labels.iter().enumerate() {
            let per_group: [(&'static str, PerGroup); 7] = [
                ("selection_rate", |e, g| Some(e.empirical[g].selection_rate)),
                ("fpr", |e, g| e.empirical[g].fpr),
                ("tpr", |e, g| e.empirical[g].tpr),
                ("selection_rate_expected", |e, g| {
                    Some(e.policy.achieved[g].selection_rate)
                }),
                ("fpr_expected", |e, g| e.policy.achieved[g].fpr),
                ("tpr_expected", |e, g| e.policy.achieved[g].tpr),
                ("randomization_width", |e, g| Some(e.widths[g])),
            ];
            for (stat, f) in per_group {
                rows.push(MetricRow {
                    policy: name,
                    group: label.clone(),
                    statistic: stat,
                    value: aggregate(results.iter().map(|r| f(side(r), g)).collect()),
                });
            }
        }
    }
    rows
}

/// Runs every replicate (in parallel) and aggregates in replicate order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    if cfg.replicates == 0 {
        return Err(Error::field("replicates", "must be at least 1"));
    }
    let seeds = derive_seeds(cfg.seed, cfg.replicates);
    let results: Vec<Result<ReplicateResult>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            run_replicate(cfg, i, s).map_err(|e| Error::Replicate {
                replicate: i,
                source: Box::new(e),
            })
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let labels = cfg.groups().labels().to_vec();
    let utility = if results.len() == 1 {
        results[0].utility.clone()
    } else {
        let reports: Vec<LevelingDownReport> = results.iter().map(|r| r.utility.clone()).collect();
        aggregate_report(&labels, &reports)?
    };
    Ok(ScenarioReport {
        name: cfg.name.clone(),
        constraint: cfg.constraint,
        baseline: cfg.baseline,
        seed: cfg.seed,
        metrics: metric_rows(&labels, &results),
        labels,
        outputs: cfg.outputs.clone(),
        reference: cfg.utility.reference(),
        replicates: results,
        utility,
    })
}

impl ScenarioReport {
    pub fn metric(&self, policy: &str, group: &str, statistic: &str) -> Option<MeanEstimate> {
        self.metrics
            .iter()
            .find(|r| r.policy == policy && r.group == group && r.statistic == statistic)
            .and_then(|r| r.value)
    }
}
