//! Confusion statistics, base rates and the two group fairness metrics.
//!
//! Both metrics are reported as the largest pairwise absolute gap between
//! groups, so `0.0` means the equality constraint holds exactly. Any rate whose
//! denominator is zero is an error rather than a NaN.

use crate::error::{Error, RateKind, Result};

/// Dense index of a sensitive group (`0..num_groups`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub usize);

impl GroupId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Display labels for the dense group ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    labels: Vec<String>,
}

impl GroupTable {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::invalid("at least two groups are required"));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(Error::invalid(format!("bad group label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::invalid(format!("duplicate group label {l:?}")));
            }
        }
        Ok(GroupTable { labels })
    }

    /// `G0`, `G1`, ... for callers without meaningful names.
    pub fn numbered(num_groups: usize) -> Result<Self> {
        Self::new((0..num_groups).map(|g| format!("G{g}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: GroupId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn find(&self, label: &str) -> Option<GroupId> {
        self.labels.iter().position(|l| l == label).map(GroupId)
    }
}

pub(crate) fn check_groups(groups: &[GroupId], num_groups: usize) -> Result<()> {
    if num_groups < 2 {
        return Err(Error::invalid("at least two groups are required"));
    }
    match groups.iter().find(|g| g.0 >= num_groups) {
        Some(g) => Err(Error::UnknownGroup(g.0)),
        None => Ok(()),
    }
}

/// Binary labels and binary predictions for a grouped population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPredictions {
    groups: Vec<GroupId>,
    labels: Vec<bool>,
    predictions: Vec<bool>,
    num_groups: usize,
}

impl LabeledPredictions {
    pub fn new(
        groups: Vec<GroupId>,
        labels: Vec<bool>,
        predictions: Vec<bool>,
        num_groups: usize,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("no samples"));
        }
        if groups.len() != labels.len() || labels.len() != predictions.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} groups, {} labels, {} predictions",
                groups.len(),
                labels.len(),
                predictions.len()
            )));
        }
        check_groups(&groups, num_groups)?;
        Ok(LabeledPredictions {
            groups,
            labels,
            predictions,
            num_groups,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn groups(&self) -> &[GroupId] {
        &self.groups
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn predictions(&self) -> &[bool] {
        &self.predictions
    }
}

/// Confusion counts of one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn selected(&self) -> u64 {
        self.tp + self.fp
    }
}

/// Per-group confusion counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionStats {
    groups: Vec<ConfusionCounts>,
}

fn ratio(num: u64, den: u64, group: usize, rate: RateKind, reason: &'static str) -> Result<f64> {
    if den == 0 {
        Err(Error::UndefinedRate {
            group,
            rate,
            reason,
        })
    } else {
        Ok(num as f64 / den as f64)
    }
}

impl ConfusionStats {
    pub fn from_counts(groups: Vec<ConfusionCounts>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::invalid("at least two groups are required"));
        }
        Ok(ConfusionStats { groups })
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, g: GroupId) -> &ConfusionCounts {
        &self.groups[g.0]
    }

    pub fn counts(&self) -> &[ConfusionCounts] {
        &self.groups
    }

    pub fn selection_rate(&self, g: GroupId) -> Result<f64> {
        let c = self.group(g);
        ratio(
            c.selected(),
            c.total(),
            g.0,
            RateKind::Selection,
            "empty group",
        )
    }

    pub fn true_positive_rate(&self, g: GroupId) -> Result<f64> {
        let c = self.group(g);
        ratio(
            c.tp,
            c.positives(),
            g.0,
            RateKind::TruePositive,
            "no positives",
        )
    }

    pub fn false_positive_rate(&self, g: GroupId) -> Result<f64> {
        let c = self.group(g);
        ratio(
            c.fp,
            c.negatives(),
            g.0,
            RateKind::FalsePositive,
            "no negatives",
        )
    }

    pub fn base_rate(&self, g: GroupId) -> Result<f64> {
        let c = self.group(g);
        ratio(c.positives(), c.total(), g.0, RateKind::Base, "empty group")
    }

    fn ids(&self) -> impl Iterator<Item = GroupId> {
        (0..self.groups.len()).map(GroupId)
    }
}

pub fn confusion_stats(data: &LabeledPredictions) -> ConfusionStats {
    let mut groups = vec![ConfusionCounts::default(); data.num_groups];
    for ((g, &y), &yhat) in data.groups.iter().zip(&data.labels).zip(&data.predictions) {
        let c = &mut groups[g.0];
        match (yhat, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    ConfusionStats { groups }
}

/// Largest absolute difference between any two values.
///
/// For a set of reals the maximum pairwise gap is `max - min`.
pub fn max_pairwise_gap(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Max over group pairs of `|P(Ŷ=1 | a) - P(Ŷ=1 | a')|`.
pub fn demographic_parity_difference(stats: &ConfusionStats) -> Result<f64> {
    let rates = stats
        .ids()
        .map(|g| stats.selection_rate(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(max_pairwise_gap(&rates))
}

/// Max over group pairs of the larger of the TPR gap and the FPR gap.
pub fn equalized_odds_difference(stats: &ConfusionStats) -> Result<f64> {
    let mut tprs = Vec::with_capacity(stats.num_groups());
    let mut fprs = Vec::with_capacity(stats.num_groups());
    for g in stats.ids() {
        let c = stats.group(g);
        if c.positives() == 0 {
            return Err(Error::MissingClass {
                group: g.0,
                positive: true,
            });
        }
        if c.negatives() == 0 {
            return Err(Error::MissingClass {
                group: g.0,
                positive: false,
            });
        }
        tprs.push(stats.true_positive_rate(g)?);
        fprs.push(stats.false_positive_rate(g)?);
    }
    Ok(max_pairwise_gap(&tprs).max(max_pairwise_gap(&fprs)))
}

/// `P(Y=1 | A=a)` for every group.
pub fn base_rate(labels: &[bool], groups: &[GroupId], num_groups: usize) -> Result<Vec<f64>> {
    if labels.len() != groups.len() {
        return Err(Error::invalid("labels and groups differ in length"));
    }
    check_groups(groups, num_groups)?;
    let mut pos = vec![0u64; num_groups];
    let mut tot = vec![0u64; num_groups];
    for (&y, g) in labels.iter().zip(groups) {
        tot[g.0] += 1;
        pos[g.0] += u64::from(y);
    }
    (0..num_groups)
        .map(|g| ratio(pos[g], tot[g], g, RateKind::Base, "empty group"))
        .collect()
}
