//! Scenario files: TOML with a versioned schema id.
//!
//! ```toml
//! schema_version = "fairpost.scenario/1"
//! name = "example"
//! seed = 7
//! replicates = 10
//! constraint = "demographic_parity"   # none | demographic_parity | equalized_odds
//! baseline = "group_optimal"          # group_optimal | shared_threshold
//! budget = 0.2                        # optional selection rate
//! outputs = ["metrics", "roc_points", "utility_report", "population_dump"]
//!
//! [population]
//! groups = ["A", "B"]
//! score_source = "observed"           # observed | construct
//!
//! [population.group.A]
//! size = 10000
//! potential_base_rate = 0.4
//! informativeness = 1.0
//! score_shift = 0.0
//! lifes_bias = { pos_to_neg = 0.1, neg_to_pos = 0.0, tag = "unjust" }
//! label_bias = { pos_to_neg = 0.0, neg_to_pos = 0.0 }
//! technical_bias = { shift = 0.0, noise_sd = 0.0 }
//!
//! [utility]
//! reference = "construct"             # construct | potential
//! default = { u11 = 1.0, u10 = 0.0, u01 = 0.0, u00 = 1.0 }
//! group.B = { u11 = 2.0, u10 = 0.0, u01 = 0.0, u00 = 1.0 }
//!
//! [cost]
//! default = { fp = 1.0, fn = 1.0 }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::GroupTable;
use crate::postprocess::Constraint;
use crate::spaces::{
    BiasSpec, BiasTag, FlipRates, GroupBias, LifesBias, PopulationSpec, ScoreSource, TechnicalBias,
};
use crate::utility::{ReferenceSpace, UtilityCells, UtilityMatrix};

pub const SCHEMA_VERSION: &str = "fairpost.scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputKind {
    Metrics,
    RocPoints,
    UtilityReport,
    PopulationDump,
}

impl OutputKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputKind::Metrics => "metrics",
            OutputKind::RocPoints => "roc_points",
            OutputKind::UtilityReport => "utility_report",
            OutputKind::PopulationDump => "population_dump",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "metrics" => Some(OutputKind::Metrics),
            "roc_points" => Some(OutputKind::RocPoints),
            "utility_report" => Some(OutputKind::UtilityReport),
            "population_dump" => Some(OutputKind::PopulationDump),
            _ => None,
        }
    }
}

/// Policy the constrained fit is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineKind {
    /// Each group at its own cost-optimal deterministic threshold; with a
    /// budget, one shared threshold meeting the budget.
    #[default]
    GroupOptimal,
    /// One group-blind threshold.
    SharedThreshold,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::GroupOptimal => "group_optimal",
            BaselineKind::SharedThreshold => "shared_threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "group_optimal" => Some(BaselineKind::GroupOptimal),
            "shared_threshold" => Some(BaselineKind::SharedThreshold),
            _ => None,
        }
    }
}

/// Per-group error costs; weights come from the sampled group shares.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCosts {
    pub cost_fp: Vec<f64>,
    pub cost_fn: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub population: PopulationSpec,
    pub utility: UtilityMatrix,
    pub constraint: Constraint,
    pub baseline: BaselineKind,
    pub cost: GroupCosts,
    pub budget: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub outputs: Vec<OutputKind>,
}

impl ScenarioConfig {
    pub fn groups(&self) -> &GroupTable {
        &self.population.groups
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_config(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_config(path)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: String,
    name: Option<String>,
    seed: u64,
    replicates: i64,
    constraint: String,
    baseline: Option<String>,
    budget: Option<f64>,
    #[serde(default)]
    outputs: Vec<String>,
    population: RawPopulation,
    utility: RawUtility,
    cost: RawCost,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPopulation {
    groups: Vec<String>,
    score_source: Option<String>,
    #[serde(default)]
    group: BTreeMap<String, RawGroup>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    size: i64,
    potential_base_rate: f64,
    #[serde(default = "one")]
    informativeness: f64,
    #[serde(default)]
    score_shift: f64,
    lifes_bias: Option<RawLifesBias>,
    label_bias: Option<RawFlips>,
    technical_bias: Option<RawTechnical>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlips {
    #[serde(default)]
    pos_to_neg: f64,
    #[serde(default)]
    neg_to_pos: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLifesBias {
    #[serde(default)]
    pos_to_neg: f64,
    #[serde(default)]
    neg_to_pos: f64,
    tag: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTechnical {
    #[serde(default)]
    shift: f64,
    #[serde(default)]
    noise_sd: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUtility {
    reference: String,
    default: Option<RawCells>,
    #[serde(default)]
    group: BTreeMap<String, RawCells>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCells {
    u11: f64,
    u10: f64,
    u01: f64,
    u00: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    default: Option<RawCostCells>,
    #[serde(default)]
    group: BTreeMap<String, RawCostCells>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCostCells {
    fp: f64,
    #[serde(rename = "fn")]
    fn_: f64,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        Error::ConfigParse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    raw.validate()
}

fn field(name: impl Into<String>, message: impl Into<String>) -> Error {
    Error::field(name, message)
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field(name, "must be finite"))
    }
}

fn unit(name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(field(name, format!("{v} outside [0, 1]")))
    }
}

/// Resolves per-group entries with an optional default; rejects unknown
/// group keys.
fn per_group<T: Copy>(
    section: &str,
    labels: &[String],
    default: Option<T>,
    groups: &BTreeMap<String, T>,
) -> Result<Vec<T>> {
    if let Some(unknown) = groups.keys().find(|k| !labels.contains(k)) {
        return Err(field(format!("{section}.group.{unknown}"), "unknown group"));
    }
    labels
        .iter()
        .map(|l| {
            groups.get(l).copied().or(default).ok_or_else(|| {
                field(
                    format!("{section}.group.{l}"),
                    "missing and no default given",
                )
            })
        })
        .collect()
}

impl RawConfig {
    fn validate(self) -> Result<ScenarioConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field(
                "schema_version",
                format!("expected {SCHEMA_VERSION:?}, got {:?}", self.schema_version),
            ));
        }
        if self.replicates < 1 {
            return Err(field("replicates", "must be at least 1"));
        }
        let constraint = Constraint::parse(&self.constraint).ok_or_else(|| {
            field(
                "constraint",
                "expected none, demographic_parity or equalized_odds",
            )
        })?;
        let baseline = match &self.baseline {
            None => BaselineKind::default(),
            Some(b) => BaselineKind::parse(b)
                .ok_or_else(|| field("baseline", "expected group_optimal or shared_threshold"))?,
        };
        if let Some(b) = self.budget {
            unit("budget", b)?;
            if constraint == Constraint::EqualizedOdds {
                return Err(field(
                    "budget",
                    "a budget is only supported with none or demographic_parity",
                ));
            }
        }
        let mut outputs = Vec::new();
        for o in &self.outputs {
            let kind = OutputKind::parse(o)
                .ok_or_else(|| field("outputs", format!("unknown output {o:?}")))?;
            if outputs.contains(&kind) {
                return Err(field("outputs", format!("{o:?} listed twice")));
            }
            outputs.push(kind);
        }
        outputs.sort();

        let labels = self.population.groups.clone();
        let table = GroupTable::new(labels.clone())
            .map_err(|e| field("population.groups", e.to_string()))?;
        if let Some(unknown) = self.population.group.keys().find(|k| !labels.contains(k)) {
            return Err(field(
                format!("population.group.{unknown}"),
                "unknown group",
            ));
        }
        let mut sizes = Vec::new();
        let mut rates = Vec::new();
        let mut biases = Vec::new();
        for l in &labels {
            let prefix = format!("population.group.{l}");
            let g = self
                .population
                .group
                .get(l)
                .ok_or_else(|| field(&prefix, "missing"))?;
            if g.size < 1 {
                return Err(field(format!("{prefix}.size"), "must be at least 1"));
            }
            sizes.push(g.size as usize);
            rates.push(unit(
                &format!("{prefix}.potential_base_rate"),
                g.potential_base_rate,
            )?);
            let informativeness = finite(&format!("{prefix}.informativeness"), g.informativeness)?;
            if informativeness < 0.0 {
                return Err(field(format!("{prefix}.informativeness"), "must be >= 0"));
            }
            let lifes_bias = match &g.lifes_bias {
                None => LifesBias::default(),
                Some(lb) => LifesBias {
                    flips: FlipRates {
                        pos_to_neg: unit(
                            &format!("{prefix}.lifes_bias.pos_to_neg"),
                            lb.pos_to_neg,
                        )?,
                        neg_to_pos: unit(
                            &format!("{prefix}.lifes_bias.neg_to_pos"),
                            lb.neg_to_pos,
                        )?,
                    },
                    tag: match lb.tag.as_deref() {
                        None | Some("unjust") => BiasTag::Unjust,
                        Some("just") => BiasTag::Just,
                        Some(other) => {
                            return Err(field(
                                format!("{prefix}.lifes_bias.tag"),
                                format!("expected just or unjust, got {other:?}"),
                            ))
                        }
                    },
                },
            };
            let label_bias = match &g.label_bias {
                None => FlipRates::default(),
                Some(f) => FlipRates {
                    pos_to_neg: unit(&format!("{prefix}.label_bias.pos_to_neg"), f.pos_to_neg)?,
                    neg_to_pos: unit(&format!("{prefix}.label_bias.neg_to_pos"), f.neg_to_pos)?,
                },
            };
            let technical = match &g.technical_bias {
                None => None,
                Some(t) => {
                    let noise_sd =
                        finite(&format!("{prefix}.technical_bias.noise_sd"), t.noise_sd)?;
                    if noise_sd < 0.0 {
                        return Err(field(
                            format!("{prefix}.technical_bias.noise_sd"),
                            "must be >= 0",
                        ));
                    }
                    Some(TechnicalBias {
                        shift: finite(&format!("{prefix}.technical_bias.shift"), t.shift)?,
                        noise_sd,
                    })
                }
            };
            biases.push(GroupBias {
                lifes_bias,
                label_bias,
                score_shift: finite(&format!("{prefix}.score_shift"), g.score_shift)?,
                informativeness,
                technical,
            });
        }
        let score_source = match self.population.score_source.as_deref() {
            None | Some("observed") => ScoreSource::Observed,
            Some("construct") => ScoreSource::Construct,
            Some(other) => {
                return Err(field(
                    "population.score_source",
                    format!("expected observed or construct, got {other:?}"),
                ))
            }
        };
        let population = PopulationSpec {
            groups: table,
            sizes,
            potential_base_rates: rates,
            bias: BiasSpec {
                groups: biases,
                score_source,
            },
            seed: self.seed,
        };
        population
            .validate()
            .map_err(|e| field("population", e.to_string()))?;

        let reference = ReferenceSpace::parse(&self.utility.reference)
            .ok_or_else(|| field("utility.reference", "expected construct or potential"))?;
        let cells = per_group(
            "utility",
            &labels,
            self.utility.default,
            &self.utility.group,
        )?;
        let utility = UtilityMatrix::new(
            reference,
            cells
                .iter()
                .map(|c| UtilityCells::new(c.u11, c.u10, c.u01, c.u00))
                .collect(),
        )
        .map_err(|e| field("utility", e.to_string()))?;

        let costs = per_group("cost", &labels, self.cost.default, &self.cost.group)?;
        for (l, c) in labels.iter().zip(&costs) {
            for (name, v) in [("fp", c.fp), ("fn", c.fn_)] {
                if !v.is_finite() || v < 0.0 {
                    return Err(field(
                        format!("cost.group.{l}.{name}"),
                        "must be finite and >= 0",
                    ));
                }
            }
        }
        if costs.iter().all(|c| c.fp == 0.0 && c.fn_ == 0.0) {
            return Err(field("cost", "at least one cost must be positive"));
        }

        Ok(ScenarioConfig {
            name: self.name.unwrap_or_else(|| "scenario".into()),
            population,
            utility,
            constraint,
            baseline,
            cost: GroupCosts {
                cost_fp: costs.iter().map(|c| c.fp).collect(),
                cost_fn: costs.iter().map(|c| c.fn_).collect(),
            },
            budget: self.budget,
            replicates: self.replicates as usize,
            seed: self.seed,
            outputs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = "fairpost.scenario/1"
seed = 3
replicates = 2
constraint = "equalized_odds"

[population]
groups = ["A", "B"]

[population.group.A]
size = 100
potential_base_rate = 0.4

[population.group.B]
size = 120
potential_base_rate = 0.5
informativeness = 2.0

[utility]
reference = "construct"
default = { u11 = 1.0, u10 = 0.0, u01 = 0.0, u00 = 1.0 }

[cost]
default = { fp = 1.0, fn = 1.0 }
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.replicates, 2);
        assert_eq!(c.constraint, Constraint::EqualizedOdds);
        assert_eq!(c.population.sizes, vec![100, 120]);
        assert_eq!(c.population.bias.groups[1].informativeness, 2.0);
        assert_eq!(c.population.bias.groups[0].informativeness, 1.0);
        assert_eq!(c.baseline, BaselineKind::GroupOptimal);
        assert!(c.outputs.is_empty());
    }

    fn expect_field(text: &str, name: &str) {
        match parse_config(text) {
            Err(Error::ConfigField { field, .. }) => assert_eq!(field, name),
            other => panic!("expected field error on {name}, got {other:?}"),
        }
    }

    #[test]
    fn zero_replicates_rejected() {
        expect_field(
            &MINIMAL.replace("replicates = 2", "replicates = 0"),
            "replicates",
        );
    }

    #[test]
    fn semantic_errors_name_the_field() {
        expect_field(
            &MINIMAL.replace("fairpost.scenario/1", "fairpost.scenario/9"),
            "schema_version",
        );
        expect_field(
            &MINIMAL.replace("potential_base_rate = 0.4", "potential_base_rate = 1.4"),
            "population.group.A.potential_base_rate",
        );
        expect_field(
            &MINIMAL.replace("\"equalized_odds\"", "\"parity\""),
            "constraint",
        );
        expect_field(
            &MINIMAL.replace(
                "constraint = \"equalized_odds\"",
                "constraint = \"equalized_odds\"\nbudget = 0.3",
            ),
            "budget",
        );
        expect_field(
            &format!("{MINIMAL}\n[utility.group.C]\nu11 = 1.0\nu10 = 0.0\nu01 = 0.0\nu00 = 0.0\n"),
            "utility.group.C",
        );
        expect_field(
            &MINIMAL.replace("[population.group.B]", "[population.group.C]"),
            "population.group.C",
        );
    }

    #[test]
    fn unknown_keys_are_parse_errors_with_position() {
        let text = MINIMAL.replace("seed = 3", "seed = 3\ncolour = \"red\"");
        match parse_config(&text) {
            Err(Error::ConfigParse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = MINIMAL.replace("size = 100", "size = = 100");
        match parse_config(&text) {
            Err(Error::ConfigParse { line, column, .. }) => {
                assert_eq!(line, 11);
                assert!(column > 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }
}
