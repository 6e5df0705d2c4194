//! Rendering of scenario reports to text files.

use std::fmt::Write;

use crate::error::Result;
use crate::metrics::GroupTable;
use crate::runner::config::OutputKind;
use crate::runner::policy_file::PolicyFile;
use crate::runner::{MetricRow, ScenarioReport};
use crate::utility::LevelingDownReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    /// Delimited rows, one header line.
    #[default]
    Rows,
    /// Sectioned `key = value` text.
    Structured,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rows" => Some(ReportFormat::Rows),
            "structured" => Some(ReportFormat::Structured),
            _ => None,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            ReportFormat::Rows => "csv",
            ReportFormat::Structured => "txt",
        }
    }
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if !x.is_nan() => x.to_string(),
        _ => "na".into(),
    }
}

fn metrics_rows(rows: &[MetricRow]) -> String {
    let mut out = String::from("policy,group,statistic,mean,se\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.policy,
            r.group,
            r.statistic,
            num(r.value.map(|v| v.mean)),
            num(r.value.map(|v| v.se))
        );
    }
    out
}

fn header(report: &ScenarioReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario = {}", report.name);
    let _ = writeln!(out, "constraint = {}", report.constraint);
    let _ = writeln!(out, "baseline = {}", report.baseline.as_str());
    let _ = writeln!(out, "seed = {}", report.seed);
    let _ = writeln!(out, "replicates = {}", report.replicates.len());
    out
}

fn metrics_structured(report: &ScenarioReport) -> String {
    let mut out = header(report);
    let mut section = String::new();
    for r in &report.metrics {
        let name = if r.group == "all" {
            r.policy.to_string()
        } else {
            format!("{}.{}", r.policy, r.group)
        };
        if name != section {
            let _ = writeln!(out, "\n[{name}]");
            section = name;
        }
        match r.value {
            Some(v) => {
                let _ = writeln!(out, "{} = {} ± {}", r.statistic, v.mean, v.se);
            }
            None => {
                let _ = writeln!(out, "{} = na", r.statistic);
            }
        }
    }
    out
}

fn utility_rows(u: &LevelingDownReport) -> String {
    let mut out = String::from("group,baseline_u,fair_u,delta,band,verdict\n");
    for r in &u.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.group, r.baseline_u, r.fair_u, r.delta, r.band, u.verdict
        );
    }
    out
}

fn utility_structured(report: &ScenarioReport) -> String {
    let mut out = header(report);
    let u = &report.utility;
    let _ = writeln!(out, "reference = {}", report.reference.as_str());
    let _ = writeln!(out, "verdict = {}", u.verdict);
    for r in &u.rows {
        let _ = writeln!(out, "\n[{}]", r.group);
        let _ = writeln!(out, "baseline_u = {}", r.baseline_u);
        let _ = writeln!(out, "fair_u = {}", r.fair_u);
        let _ = writeln!(out, "delta = {}", r.delta);
        let _ = writeln!(out, "band = {}", r.band);
    }
    out
}

impl ScenarioReport {
    /// `(file name, contents)` for every requested output plus the fitted
    /// policies of the first replicate.
    pub fn files(&self, format: ReportFormat) -> Result<Vec<(String, String)>> {
        let ext = format.extension();
        let mut files = Vec::new();
        for kind in &self.outputs {
            match kind {
                OutputKind::Metrics => files.push((
                    format!("metrics.{ext}"),
                    match format {
                        ReportFormat::Rows => metrics_rows(&self.metrics),
                        ReportFormat::Structured => metrics_structured(self),
                    },
                )),
                OutputKind::UtilityReport => files.push((
                    format!("utility_report.{ext}"),
                    match format {
                        ReportFormat::Rows => utility_rows(&self.utility),
                        ReportFormat::Structured => utility_structured(self),
                    },
                )),
                OutputKind::RocPoints => {
                    let mut out = String::from("group,kind,index,fpr,tpr,threshold\n");
                    for r in self.replicates[0].roc.iter().flatten() {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            r.group,
                            r.kind,
                            r.index,
                            num(Some(r.fpr)),
                            num(Some(r.tpr)),
                            num(r.threshold)
                        );
                    }
                    files.push(("roc_points.csv".into(), out));
                }
                OutputKind::PopulationDump => {
                    if let Some(pop) = &self.replicates[0].population {
                        let mut buf = Vec::new();
                        pop.write_dump(&mut buf)?;
                        files.push((
                            "population.csv".into(),
                            String::from_utf8(buf).expect("dump is utf-8"),
                        ));
                    }
                }
            }
        }
        let first = &self.replicates[0];
        let groups = GroupTable::new(self.labels.clone())?;
        for (name, eval) in [
            ("baseline_policy.txt", &first.baseline),
            ("fair_policy.txt", &first.fair),
        ] {
            let file = PolicyFile {
                groups: groups.clone(),
                policy: eval.policy.clone(),
                seed: Some(first.decision_seed),
            };
            files.push((name.into(), file.render()));
        }
        Ok(files)
    }
}
