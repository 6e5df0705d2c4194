//! Per-individual utility of a decision, group aggregation and the
//! leveling-down diagnosis.

use std::fmt;

use crate::error::{Error, RateKind, Result};
use crate::postprocess::{apply_policy, FairPolicy};
use crate::spaces::{Individual, Population, Space};

/// Which label a utility is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceSpace {
    #[default]
    Construct,
    Potential,
}

impl ReferenceSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceSpace::Construct => "construct",
            ReferenceSpace::Potential => "potential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "construct" => Some(ReferenceSpace::Construct),
            "potential" => Some(ReferenceSpace::Potential),
            _ => None,
        }
    }

    fn space(self) -> Space {
        match self {
            ReferenceSpace::Construct => Space::Construct,
            ReferenceSpace::Potential => Space::Potential,
        }
    }
}

/// `u(decision, reference)` for one group. The first index is the decision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UtilityCells {
    pub u11: f64,
    pub u10: f64,
    pub u01: f64,
    pub u00: f64,
}

impl UtilityCells {
    pub const fn new(u11: f64, u10: f64, u01: f64, u00: f64) -> Self {
        UtilityCells { u11, u10, u01, u00 }
    }

    /// One for correct decisions, zero for errors.
    pub const fn accuracy() -> Self {
        UtilityCells::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn lookup(&self, decision: bool, truth: bool) -> f64 {
        match (decision, truth) {
            (true, true) => self.u11,
            (true, false) => self.u10,
            (false, true) => self.u01,
            (false, false) => self.u00,
        }
    }

    pub fn affine(&self, a: f64, b: f64) -> Self {
        UtilityCells::new(
            a * self.u11 + b,
            a * self.u10 + b,
            a * self.u01 + b,
            a * self.u00 + b,
        )
    }

    fn is_finite(&self) -> bool {
        [self.u11, self.u10, self.u01, self.u00]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    reference: ReferenceSpace,
    groups: Vec<UtilityCells>,
}

impl UtilityMatrix {
    pub fn new(reference: ReferenceSpace, groups: Vec<UtilityCells>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("utility matrix needs at least one group"));
        }
        if let Some(g) = groups.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "utility entries of group {g} are not finite"
            )));
        }
        Ok(UtilityMatrix { reference, groups })
    }

    /// Same cells for every group.
    pub fn uniform(
        reference: ReferenceSpace,
        cells: UtilityCells,
        num_groups: usize,
    ) -> Result<Self> {
        UtilityMatrix::new(reference, vec![cells; num_groups])
    }

    pub fn reference(&self) -> ReferenceSpace {
        self.reference
    }

    pub fn groups(&self) -> &[UtilityCells] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// `a * m + b` entrywise.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        UtilityMatrix::new(
            self.reference,
            self.groups.iter().map(|c| c.affine(a, b)).collect(),
        )
    }

    fn cells(&self, g: usize) -> Result<&UtilityCells> {
        self.groups.get(g).ok_or(Error::UnknownGroup(g))
    }

    fn value(&self, ind: &Individual, decision: bool) -> Result<f64> {
        let truth = ind.label(self.reference.space());
        Ok(self.cells(ind.group.0)?.lookup(decision, truth))
    }
}

/// Utility of one individual's recorded decision.
pub fn individual_utility(ind: &Individual, m: &UtilityMatrix) -> Result<f64> {
    let d = ind.decision.ok_or(Error::DecisionUnset(0))?;
    m.value(ind, d)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// Returns `None` for an empty sample. A single value has zero SE.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in values {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        if n == 0 {
            return None;
        }
        let se = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Some(MeanEstimate { mean, se, n })
    }
}

fn check_groups(population: &Population, m: &UtilityMatrix) -> Result<()> {
    if m.num_groups() != population.num_groups() {
        return Err(Error::Domain(format!(
            "utility matrix has {} groups, population has {}",
            m.num_groups(),
            population.num_groups()
        )));
    }
    Ok(())
}

fn per_group(
    num_groups: usize,
    items: impl Iterator<Item = Result<(usize, f64)>>,
) -> Result<Vec<MeanEstimate>> {
    let mut buckets = vec![Vec::new(); num_groups];
    for item in items {
        let (g, v) = item?;
        buckets[g].push(v);
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(g, b)| {
            MeanEstimate::from_values(b).ok_or(Error::UndefinedRate {
                group: g,
                rate: RateKind::MeanUtility,
                reason: "empty group",
            })
        })
        .collect()
}

/// Per-group mean utility of the recorded decisions.
pub fn group_utility(population: &Population, m: &UtilityMatrix) -> Result<Vec<MeanEstimate>> {
    check_groups(population, m)?;
    let items = population.individuals().iter().enumerate().map(|(i, ind)| {
        let d = ind.decision.ok_or(Error::DecisionUnset(i))?;
        Ok((ind.group.0, m.value(ind, d)?))
    });
    per_group(population.num_groups(), items)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No group moves beyond its band.
    None,
    /// Someone loses, nobody gains.
    LevelingDown,
    /// Someone loses, someone gains.
    Redistribution,
    /// Someone gains, nobody loses.
    Improvement,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::None => "NONE",
            Verdict::LevelingDown => "LEVELING_DOWN",
            Verdict::Redistribution => "REDISTRIBUTION",
            Verdict::Improvement => "IMPROVEMENT",
        }
    }

    /// Classifies `(delta, band)` pairs; a move counts only if it strictly
    /// exceeds its band.
    pub fn classify(moves: impl IntoIterator<Item = (f64, f64)>) -> Verdict {
        let (mut down, mut up) = (false, false);
        for (delta, band) in moves {
            down |= delta < -band;
            up |= delta > band;
        }
        match (down, up) {
            (false, false) => Verdict::None,
            (true, false) => Verdict::LevelingDown,
            (true, true) => Verdict::Redistribution,
            (false, true) => Verdict::Improvement,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Band width in standard errors.
pub const BAND_SE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityRow {
    pub group: String,
    pub baseline_u: f64,
    pub fair_u: f64,
    pub delta: f64,
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelingDownReport {
    pub rows: Vec<UtilityRow>,
    pub verdict: Verdict,
}

impl LevelingDownReport {
    fn from_rows(rows: Vec<UtilityRow>) -> Self {
        let verdict = Verdict::classify(rows.iter().map(|r| (r.delta, r.band)));
        LevelingDownReport { rows, verdict }
    }
}

/// Compares two decision vectors on the same population. The band is
/// [`BAND_SE`] standard errors of the paired per-individual difference.
pub fn compare_decisions(
    population: &Population,
    baseline: &[bool],
    fair: &[bool],
    m: &UtilityMatrix,
) -> Result<LevelingDownReport> {
    check_groups(population, m)?;
    if baseline.len() != population.len() || fair.len() != population.len() {
        return Err(Error::Domain(
            "decision vectors do not match the population".into(),
        ));
    }
    let inds = population.individuals();
    let g = population.num_groups();
    let base = per_group(
        g,
        inds.iter()
            .zip(baseline)
            .map(|(i, &d)| Ok((i.group.0, m.value(i, d)?))),
    )?;
    let fair_u = per_group(
        g,
        inds.iter()
            .zip(fair)
            .map(|(i, &d)| Ok((i.group.0, m.value(i, d)?))),
    )?;
    let diff = per_group(
        g,
        inds.iter()
            .zip(baseline.iter().zip(fair))
            .map(|(i, (&b, &f))| Ok((i.group.0, m.value(i, f)? - m.value(i, b)?))),
    )?;
    let rows = (0..g)
        .map(|k| UtilityRow {
            group: population.groups().labels()[k].clone(),
            baseline_u: base[k].mean,
            fair_u: fair_u[k].mean,
            delta: diff[k].mean,
            band: BAND_SE * diff[k].se,
        })
        .collect();
    Ok(LevelingDownReport::from_rows(rows))
}

/// Applies both policies with the same seed and compares group utilities.
pub fn leveling_down_report(
    population: &Population,
    baseline: &FairPolicy,
    fair: &FairPolicy,
    m: &UtilityMatrix,
    seed: u64,
) -> Result<LevelingDownReport> {
    let g = population.num_groups();
    if baseline.num_groups() != g || fair.num_groups() != g {
        return Err(Error::Domain(format!(
            "population has {g} groups, policies have {} and {}",
            baseline.num_groups(),
            fair.num_groups()
        )));
    }
    let scores = population.to_score_set();
    let b = apply_policy(baseline, &scores, seed)?;
    let f = apply_policy(fair, &scores, seed)?;
    compare_decisions(population, b.predictions(), f.predictions(), m)
}

/// Verdict over replicate-level deltas: each group's band is
/// [`BAND_SE`] standard errors of its replicate mean.
pub fn aggregate_report(
    labels: &[String],
    replicates: &[LevelingDownReport],
) -> Result<LevelingDownReport> {
    if replicates.is_empty() {
        return Err(Error::invalid("no replicates to aggregate"));
    }
    let rows = labels
        .iter()
        .enumerate()
        .map(|(k, label)| {
            let col = |f: fn(&UtilityRow) -> f64| {
                MeanEstimate::from_values(replicates.iter().map(|r| f(&r.rows[k])))
                    .expect("non-empty")
            };
            let delta = col(|r| r.delta);
            UtilityRow {
                group: label.clone(),
                baseline_u: col(|r| r.baseline_u).mean,
                fair_u: col(|r| r.fair_u).mean,
                delta: delta.mean,
                band: BAND_SE * delta.se,
            }
        })
        .collect();
    Ok(LevelingDownReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{GroupId, GroupTable};

    fn ind(g: usize, construct: bool, decision: Option<bool>) -> Individual {
        Individual {
            group: GroupId(g),
            potential: construct,
            construct,
            observed: construct,
            score: 0.0,
            decision,
        }
    }

    fn disease() -> UtilityMatrix {
        UtilityMatrix::uniform(
            ReferenceSpace::Construct,
            UtilityCells::new(1.0, -1.0, -2.0, 0.0),
            2,
        )
        .unwrap()
    }

    #[test]
    fn false_positive_lookup() {
        assert_eq!(
            individual_utility(&ind(0, false, Some(true)), &disease()).unwrap(),
            -1.0
        );
        assert_eq!(
            individual_utility(&ind(1, true, Some(false)), &disease()).unwrap(),
            -2.0
        );
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let m =
            UtilityMatrix::uniform(ReferenceSpace::Potential, UtilityCells::default(), 2).unwrap();
        for (c, d) in [(true, true), (true, false), (false, true), (false, false)] {
            assert_eq!(individual_utility(&ind(0, c, Some(d)), &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn resume_false_positive_is_positive() {
        let m = UtilityMatrix::uniform(
            ReferenceSpace::Potential,
            UtilityCells::new(1.0, 0.5, 0.0, 0.0),
            2,
        )
        .unwrap();
        assert!(individual_utility(&ind(0, false, Some(true)), &m).unwrap() > 0.0);
    }

    #[test]
    fn unset_decision_is_an_error() {
        assert!(matches!(
            individual_utility(&ind(0, true, None), &disease()),
            Err(Error::DecisionUnset(_))
        ));
    }

    #[test]
    fn potential_reference_reads_potential_label() {
        let mut i = ind(0, false, Some(true));
        i.potential = true;
        let m = UtilityMatrix::uniform(
            ReferenceSpace::Potential,
            UtilityCells::new(2.0, -1.0, 0.0, 0.0),
            1,
        )
        .unwrap();
        assert_eq!(individual_utility(&i, &m).unwrap(), 2.0);
    }

    #[test]
    fn all_true_positives_mean() {
        let groups = GroupTable::new(vec!["A".into(), "B".into()]).unwrap();
        let pop = Population::new(
            groups,
            vec![
                ind(0, true, Some(true)),
                ind(0, true, Some(true)),
                ind(1, false, Some(false)),
            ],
        )
        .unwrap();
        let m = UtilityMatrix::uniform(
            ReferenceSpace::Construct,
            UtilityCells::new(2.0, 0.0, 0.0, 0.0),
            2,
        )
        .unwrap();
        let u = group_utility(&pop, &m).unwrap();
        assert_eq!(u[0].mean, 2.0);
        assert_eq!(u[0].se, 0.0);
        assert_eq!(u[1].mean, 0.0);
    }

    #[test]
    fn empty_group_is_undefined() {
        let groups = GroupTable::new(vec!["A".into(), "B".into()]).unwrap();
        let pop = Population::new(groups, vec![ind(0, true, Some(true))]).unwrap();
        assert!(matches!(
            group_utility(&pop, &disease()),
            Err(Error::UndefinedRate { group: 1, .. })
        ));
    }

    #[test]
    fn identical_decisions_give_none() {
        let groups = GroupTable::new(vec!["A".into(), "B".into()]).unwrap();
        let pop = Population::new(
            groups,
            vec![
                ind(0, true, None),
                ind(0, false, None),
                ind(1, true, None),
                ind(1, false, None),
            ],
        )
        .unwrap();
        let d = [true, false, false, true];
        let r = compare_decisions(&pop, &d, &d, &disease()).unwrap();
        assert_eq!(r.verdict, Verdict::None);
        assert!(r.rows.iter().all(|row| row.delta == 0.0 && row.band == 0.0));
    }

    #[test]
    fn verdict_classification() {
        assert_eq!(Verdict::classify([(0.0, 0.0), (0.0, 0.1)]), Verdict::None);
        assert_eq!(
            Verdict::classify([(-0.2, 0.1), (0.05, 0.1)]),
            Verdict::LevelingDown
        );
        assert_eq!(
            Verdict::classify([(-0.2, 0.1), (0.2, 0.1)]),
            Verdict::Redistribution
        );
        assert_eq!(
            Verdict::classify([(0.2, 0.1), (0.0, 0.1)]),
            Verdict::Improvement
        );
        // on the band edge nothing moves
        assert_eq!(Verdict::classify([(-0.1, 0.1)]), Verdict::None);
    }

    #[test]
    fn mean_estimate_matches_textbook() {
        let e = MeanEstimate::from_values([1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.se - sd / 2.0).abs() < 1e-15);
        assert!(MeanEstimate::from_values(std::iter::empty()).is_none());
    }
}
