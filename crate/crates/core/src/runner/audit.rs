//! Recomputes metrics for a population dump under a stored policy.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::metrics::{
    confusion_stats, demographic_parity_difference, equalized_odds_difference, max_pairwise_gap,
};
use crate::postprocess::{
    apply_policy, expected_rates, randomization_width, FairPolicy, OperatingPoint,
};
use crate::runner::empirical_points;
use crate::runner::policy_file::PolicyFile;
use crate::runner::report::ReportFormat;
use crate::spaces::Population;

#[derive(Debug, Clone, PartialEq)]
pub struct RecordedDecisions {
    pub points: Vec<OperatingPoint>,
    pub dp_difference: f64,
    pub eo_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
    pub observed_base_rates: Vec<f64>,
    /// Metrics of the decisions stored in the dump, if every row has one.
    pub recorded: Option<RecordedDecisions>,
    /// Exact expected rates of the policy on the dump's scores.
    pub expected: Vec<OperatingPoint>,
    pub expected_dp_difference: f64,
    pub expected_eo_difference: Option<f64>,
    pub widths: Vec<f64>,
    /// Whether re-applying the policy with its stored seed reproduces the
    /// recorded decisions.
    pub reproduced: Option<bool>,
}

/// Reorders the policy's groups to the population's label order.
fn align(population: &Population, file: &PolicyFile) -> Result<FairPolicy> {
    let labels = population.groups().labels();
    let mut theirs: Vec<&String> = file.groups.labels().iter().collect();
    let mut ours: Vec<&String> = labels.iter().collect();
    theirs.sort();
    ours.sort();
    if theirs != ours {
        return Err(Error::Domain(format!(
            "policy groups [{}] do not match population groups [{}]",
            file.groups.labels().join(","),
            labels.join(",")
        )));
    }
    let order: Vec<usize> = labels
        .iter()
        .map(|l| file.groups.find(l).expect("checked above").0)
        .collect();
    let p = &file.policy;
    Ok(FairPolicy {
        policies: order.iter().map(|&i| p.policies[i]).collect(),
        achieved: order.iter().map(|&i| p.achieved[i]).collect(),
        constraint: p.constraint,
        objective_value: p.objective_value,
        degenerate: p.degenerate,
    })
}

pub fn audit(population: &Population, file: &PolicyFile) -> Result<AuditReport> {
    let policy = align(population, file)?;
    let scores = population.to_score_set();
    let expected = expected_rates(&policy, &scores)?;
    let sel: Vec<f64> = expected.iter().map(|p| p.selection_rate).collect();
    let fpr: Option<Vec<f64>> = expected.iter().map(|p| p.fpr).collect();
    let tpr: Option<Vec<f64>> = expected.iter().map(|p| p.tpr).collect();
    let expected_eo_difference = fpr
        .zip(tpr)
        .map(|(f, t)| max_pairwise_gap(&f).max(max_pairwise_gap(&t)));

    let recorded_pred = population.labeled_predictions().ok();
    let recorded = match &recorded_pred {
        Some(pred) => {
            let stats = confusion_stats(pred);
            Some(RecordedDecisions {
                points: empirical_points(&stats)?,
                dp_difference: demographic_parity_difference(&stats)?,
                eo_difference: equalized_odds_difference(&stats).ok(),
            })
        }
        None => None,
    };
    let reproduced = match (&recorded_pred, file.seed) {
        (Some(pred), Some(seed)) => {
            Some(apply_policy(&policy, &scores, seed)?.predictions() == pred.predictions())
        }
        _ => None,
    };
    let rates = population.space_base_rates()?;
    Ok(AuditReport {
        labels: population.groups().labels().to_vec(),
        sizes: population.group_sizes(),
        observed_base_rates: rates.observed,
        recorded,
        expected_dp_difference: max_pairwise_gap(&sel),
        expected_eo_difference,
        expected,
        widths: randomization_width(&policy, &scores)?,
        reproduced,
    })
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "na".into(), |x| x.to_string())
}

impl AuditReport {
    /// `(source, group, statistic, value)` entries in a fixed order.
    fn entries(&self) -> Vec<(&'static str, String, &'static str, String)> {
        let mut e = Vec::new();
        for (g, label) in self.labels.iter().enumerate() {
            e.push((
                "population",
                label.clone(),
                "size",
                self.sizes[g].to_string(),
            ));
            e.push((
                "population",
                label.clone(),
                "observed_base_rate",
                self.observed_base_rates[g].to_string(),
            ));
        }
        if let Some(r) = &self.recorded {
            e.push((
                "recorded",
                "all".into(),
                "dp_difference",
                r.dp_difference.to_string(),
            ));
            e.push((
                "recorded",
                "all".into(),
                "eo_difference",
                num(r.eo_difference),
            ));
            for (label, p) in self.labels.iter().zip(&r.points) {
                e.push((
                    "recorded",
                    label.clone(),
                    "selection_rate",
                    p.selection_rate.to_string(),
                ));
                e.push(("recorded", label.clone(), "fpr", num(p.fpr)));
                e.push(("recorded", label.clone(), "tpr", num(p.tpr)));
            }
        }
        e.push((
            "expected",
            "all".into(),
            "dp_difference",
            self.expected_dp_difference.to_string(),
        ));
        e.push((
            "expected",
            "all".into(),
            "eo_difference",
            num(self.expected_eo_difference),
        ));
        for (g, label) in self.labels.iter().enumerate() {
            let p = &self.expected[g];
            e.push((
                "expected",
                label.clone(),
                "selection_rate",
                p.selection_rate.to_string(),
            ));
            e.push(("expected", label.clone(), "fpr", num(p.fpr)));
            e.push(("expected", label.clone(), "tpr", num(p.tpr)));
            e.push((
                "expected",
                label.clone(),
                "randomization_width",
                self.widths[g].to_string(),
            ));
        }
        if let Some(r) = self.reproduced {
            e.push(("check", "all".into(), "decisions_reproduced", r.to_string()));
        }
        e
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let mut out = String::new();
        match format {
            ReportFormat::Rows => {
                out.push_str("source,group,statistic,value\n");
                for (s, g, k, v) in self.entries() {
                    let _ = writeln!(out, "{s},{g},{k},{v}");
                }
            }
            ReportFormat::Structured => {
                let mut section = String::new();
                for (s, g, k, v) in self.entries() {
                    let name = if g == "all" {
                        s.to_string()
                    } else {
                        format!("{s}.{g}")
                    };
                    if name != section {
                        if !section.is_empty() {
                            out.push('\n');
                        }
                        let _ = writeln!(out, "[{name}]");
                        section = name;
                    }
                    let _ = writeln!(out, "{k} = {v}");
                }
            }
        }
        out
    }
}
