//! Group fairness metrics, ROC-hull randomized threshold post-processing and
//! a bias-injection population simulator.
//!
//! The pieces compose into reproducible experiments: [`spaces`] samples a
//! population whose labels pass through explicit bias mechanisms,
//! [`postprocess`] fits group-specific (randomized) thresholds under a
//! fairness constraint, [`metrics`] audits the resulting predictions and
//! [`utility`] measures who gains or loses. [`runner`] ties them to
//! declarative scenario files.

pub mod error;
pub mod geometry;
pub mod metrics;
pub mod postprocess;
pub mod rng;
pub mod roc;
pub mod runner;
pub mod spaces;
pub mod utility;

pub use error::{Error, ErrorCategory, Result};
pub use metrics::{
    base_rate, confusion_stats, demographic_parity_difference, equalized_odds_difference,
    ConfusionCounts, ConfusionStats, GroupId, GroupTable, LabeledPredictions,
};
pub use postprocess::{
    apply_policy, fit, fit_demographic_parity, fit_equalized_odds, fit_shared_threshold,
    fit_unconstrained, randomization_width, Constraint, CostModel, FairPolicy, OperatingPoint,
};
pub use roc::{
    build_roc, hull_intersection, realize_point, upper_hull, ConstantArm, MixturePolicy, RocCurve,
    RocHull, RocPoint, ScoreSet,
};
pub use runner::{
    load_config, parse_config, run_scenario, ReportFormat, ScenarioConfig, ScenarioReport,
};
pub use spaces::{
    sample_population, space_base_rates, BiasSpec, BiasTag, FlipRates, GroupBias, Individual,
    LifesBias, Population, PopulationSpec, ScoreSource, Space, SpaceBaseRates, TechnicalBias,
};
pub use utility::{
    group_utility, individual_utility, leveling_down_report, LevelingDownReport, MeanEstimate,
    ReferenceSpace, UtilityCells, UtilityMatrix, UtilityRow, Verdict,
};
