//! Population simulator for the chain of spaces an individual passes
//! through: potential (`Ẏ`), construct (`Ỹ`), observed (`Y`), score (`R`)
//! and finally decision (`Ŷ`).
//!
//! Each transition applies one bias mechanism per group:
//!
//! * life's bias flips `Ẏ -> Ỹ`,
//! * measurement label bias flips `Ỹ -> Y`,
//! * measurement score shift adds `δ_a` to every score of the group,
//! * technical bias perturbs scores after the shift.
//!
//! Scores come from a unit-variance normal location family with means
//! `±informativeness / 2` for the score-generating class (`Y` by default).
//! Individual `i` draws all its randomness from its own ChaCha stream, so a
//! population is a pure function of `(spec, seed)` and changing one bias
//! parameter leaves every other draw untouched.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::metrics::{GroupId, GroupTable, LabeledPredictions};
use crate::rng::stream_rng;
use crate::roc::ScoreSet;

/// Normative label for a bias; carried through reports, never interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasTag {
    Just,
    #[default]
    Unjust,
}

impl BiasTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BiasTag::Just => "just",
            BiasTag::Unjust => "unjust",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlipRates {
    /// `P(1 -> 0)`.
    pub pos_to_neg: f64,
    /// `P(0 -> 1)`.
    pub neg_to_pos: f64,
}

impl FlipRates {
    pub fn apply(&self, label: bool, u: f64) -> bool {
        if label {
            u >= self.pos_to_neg
        } else {
            u < self.neg_to_pos
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        for (name, r) in [
            ("pos_to_neg", self.pos_to_neg),
            ("neg_to_pos", self.neg_to_pos),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!(
                    "{what}.{name} = {r} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LifesBias {
    pub flips: FlipRates,
    pub tag: BiasTag,
}

/// Post-hoc score distortion introduced by the model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TechnicalBias {
    pub shift: f64,
    pub noise_sd: f64,
}

/// Bias parameters of one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupBias {
    pub lifes_bias: LifesBias,
    pub label_bias: FlipRates,
    pub score_shift: f64,
    pub informativeness: f64,
    pub technical: Option<TechnicalBias>,
}

impl GroupBias {
    /// No distortion anywhere, unit informativeness.
    pub fn none() -> Self {
        GroupBias {
            lifes_bias: LifesBias::default(),
            label_bias: FlipRates::default(),
            score_shift: 0.0,
            informativeness: 1.0,
            technical: None,
        }
    }

    fn validate(&self, g: usize) -> Result<()> {
        self.lifes_bias
            .flips
            .validate(&format!("group {g} lifes_bias"))?;
        self.label_bias.validate(&format!("group {g} label_bias"))?;
        if !self.informativeness.is_finite() || self.informativeness < 0.0 {
            return Err(Error::invalid(format!(
                "group {g} informativeness must be finite and >= 0"
            )));
        }
        if !self.score_shift.is_finite() {
            return Err(Error::invalid(format!(
                "group {g} score_shift must be finite"
            )));
        }
        if let Some(t) = self.technical {
            if !t.shift.is_finite() || !t.noise_sd.is_finite() || t.noise_sd < 0.0 {
                return Err(Error::invalid(format!(
                    "group {g} technical bias needs finite shift and noise_sd >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// Which label drives the score distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreSource {
    #[default]
    Observed,
    Construct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    pub groups: Vec<GroupBias>,
    pub score_source: ScoreSource,
}

impl BiasSpec {
    pub fn new(groups: Vec<GroupBias>) -> Self {
        BiasSpec {
            groups,
            score_source: ScoreSource::Observed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub groups: GroupTable,
    pub sizes: Vec<usize>,
    pub potential_base_rates: Vec<f64>,
    pub bias: BiasSpec,
    pub seed: u64,
}

impl PopulationSpec {
    pub fn new(
        labels: Vec<String>,
        sizes: Vec<usize>,
        potential_base_rates: Vec<f64>,
        bias: BiasSpec,
        seed: u64,
    ) -> Result<Self> {
        let spec = PopulationSpec {
            groups: GroupTable::new(labels)?,
            sizes,
            potential_base_rates,
            bias,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.groups.len();
        if self.sizes.len() != g
            || self.potential_base_rates.len() != g
            || self.bias.groups.len() != g
        {
            return Err(Error::invalid(format!(
                "{g} groups but {} sizes, {} base rates, {} bias entries",
                self.sizes.len(),
                self.potential_base_rates.len(),
                self.bias.groups.len()
            )));
        }
        for (i, &n) in self.sizes.iter().enumerate() {
            if n == 0 {
                return Err(Error::invalid(format!("group {i} has size 0")));
            }
        }
        for (i, &r) in self.potential_base_rates.iter().enumerate() {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!(
                    "group {i} potential base rate {r} outside [0, 1]"
                )));
            }
        }
        for (i, b) in self.bias.groups.iter().enumerate() {
            b.validate(i)?;
        }
        Ok(())
    }

    pub fn sample(&self) -> Population {
        sample_population(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub group: GroupId,
    pub potential: bool,
    pub construct: bool,
    pub observed: bool,
    pub score: f64,
    pub decision: Option<bool>,
}

/// The three label spaces that precede the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Potential,
    Construct,
    Observed,
}

impl Individual {
    pub fn label(&self, space: Space) -> bool {
        match space {
            Space::Potential => self.potential,
            Space::Construct => self.construct,
            Space::Observed => self.observed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    groups: GroupTable,
    individuals: Vec<Individual>,
}

/// Samples every individual; group `0` first, then group `1`, and so on.
pub fn sample_population(spec: &PopulationSpec) -> Population {
    let mut individuals = Vec::with_capacity(spec.sizes.iter().sum());
    let mut index = 0u64;
    for (g, &size) in spec.sizes.iter().enumerate() {
        let bias = &spec.bias.groups[g];
        let base = spec.potential_base_rates[g];
        for _ in 0..size {
            let mut rng = stream_rng(spec.seed, index);
            index += 1;
            let potential = rng.random::<f64>() < base;
            let construct = bias.lifes_bias.flips.apply(potential, rng.random());
            let observed = bias.label_bias.apply(construct, rng.random());
            let class = match spec.bias.score_source {
                ScoreSource::Observed => observed,
                ScoreSource::Construct => construct,
            };
            let half = bias.informativeness / 2.0;
            let z: f64 = rng.sample(StandardNormal);
            let z_tech: f64 = rng.sample(StandardNormal);
            let mut score = if class { half } else { -half } + z + bias.score_shift;
            if let Some(t) = bias.technical {
                score += t.shift + t.noise_sd * z_tech;
            }
            individuals.push(Individual {
                group: GroupId(g),
                potential,
                construct,
                observed,
                score,
                decision: None,
            });
        }
    }
    Population {
        groups: spec.groups.clone(),
        individuals,
    }
}

/// Per-group empirical base rates in each pre-decision space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBaseRates {
    pub potential: Vec<f64>,
    pub construct: Vec<f64>,
    pub observed: Vec<f64>,
}

impl Population {
    pub fn new(groups: GroupTable, individuals: Vec<Individual>) -> Result<Self> {
        if individuals.is_empty() {
            return Err(Error::invalid("empty population"));
        }
        if let Some(ind) = individuals.iter().find(|i| i.group.0 >= groups.len()) {
            return Err(Error::UnknownGroup(ind.group.0));
        }
        if let Some(i) = individuals.iter().position(|i| !i.score.is_finite()) {
            return Err(Error::invalid(format!(
                "individual {i} has a non-finite score"
            )));
        }
        Ok(Population {
            groups,
            individuals,
        })
    }

    pub fn groups(&self) -> &GroupTable {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Scores paired with observed labels: what a model and its
    /// post-processing get to see.
    pub fn to_score_set(&self) -> ScoreSet {
        self.score_set_for(Space::Observed)
    }

    pub fn score_set_for(&self, space: Space) -> ScoreSet {
        ScoreSet::new(
            self.individuals.iter().map(|i| i.score).collect(),
            self.individuals.iter().map(|i| i.label(space)).collect(),
            self.individuals.iter().map(|i| i.group).collect(),
            self.groups.len(),
        )
        .expect("population invariants guarantee a valid score set")
    }

    /// Copy with decisions taken from `predictions` (same order and length).
    pub fn with_decisions(&self, predictions: &LabeledPredictions) -> Result<Self> {
        if predictions.len() != self.len() {
            return Err(Error::Domain(format!(
                "{} predictions for {} individuals",
                predictions.len(),
                self.len()
            )));
        }
        let individuals = self
            .individuals
            .iter()
            .zip(predictions.predictions())
            .map(|(ind, &d)| Individual {
                decision: Some(d),
                ..*ind
            })
            .collect();
        Ok(Population {
            groups: self.groups.clone(),
            individuals,
        })
    }

    /// Observed labels with the stored decisions.
    pub fn labeled_predictions(&self) -> Result<LabeledPredictions> {
        let decisions = self
            .individuals
            .iter()
            .enumerate()
            .map(|(i, ind)| ind.decision.ok_or(Error::DecisionUnset(i)))
            .collect::<Result<Vec<_>>>()?;
        LabeledPredictions::new(
            self.individuals.iter().map(|i| i.group).collect(),
            self.individuals.iter().map(|i| i.observed).collect(),
            decisions,
            self.groups.len(),
        )
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut n = vec![0usize; self.groups.len()];
        for i in &self.individuals {
            n[i.group.0] += 1;
        }
        n
    }

    pub fn space_base_rates(&self) -> Result<SpaceBaseRates> {
        space_base_rates(self)
    }

    /// Writes one delimited row per individual.
    pub fn write_dump<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DUMP_HEADER)?;
        for ind in &self.individuals {
            let bit = |b: bool| if b { "1" } else { "0" };
            let decision = ind.decision.map_or("", bit);
            w.write_record([
                self.groups.label(ind.group),
                bit(ind.potential),
                bit(ind.construct),
                bit(ind.observed),
                &ind.score.to_string(),
                decision,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a dump written by [`Population::write_dump`]. Group ids follow
    /// the order in which labels first appear.
    pub fn read_dump<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.iter().ne(DUMP_HEADER.iter().copied()) {
            return Err(Error::invalid(format!(
                "population dump header must be {}",
                DUMP_HEADER.join(",")
            )));
        }
        let mut labels: Vec<String> = Vec::new();
        let mut individuals = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = row + 2;
            let label = &rec[0];
            let group = match labels.iter().position(|l| l == label) {
                Some(g) => g,
                None => {
                    labels.push(label.to_string());
                    labels.len() - 1
                }
            };
            let bit = |i: usize| -> Result<bool> {
                match &rec[i] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::invalid(format!(
                        "line {line}: column {} must be 0 or 1, got {other:?}",
                        DUMP_HEADER[i]
                    ))),
                }
            };
            let score: f64 = rec[4]
                .parse()
                .map_err(|_| Error::invalid(format!("line {line}: bad score {:?}", &rec[4])))?;
            let decision = if rec[5].is_empty() {
                None
            } else {
                Some(bit(5)?)
            };
            individuals.push(Individual {
                group: GroupId(group),
                potential: bit(1)?,
                construct: bit(2)?,
                observed: bit(3)?,
                score,
                decision,
            });
        }
        Population::new(GroupTable::new(labels)?, individuals)
    }
}

pub const DUMP_HEADER: [&str; 6] = [
    "group",
    "potential",
    "construct",
    "observed",
    "score",
    "decision",
];

pub fn space_base_rates(population: &Population) -> Result<SpaceBaseRates> {
    let g = population.num_groups();
    let mut n = vec![0u64; g];
    let mut pot = vec![0u64; g];
    let mut con = vec![0u64; g];
    let mut obs = vec![0u64; g];
    for i in &population.individuals {
        let k = i.group.0;
        n[k] += 1;
        pot[k] += u64::from(i.potential);
        con[k] += u64::from(i.construct);
        obs[k] += u64::from(i.observed);
    }
    if let Some(k) = n.iter().position(|&c| c == 0) {
        return Err(Error::UndefinedRate {
            group: k,
            rate: crate::error::RateKind::Base,
            reason: "empty group",
        });
    }
    let rate = |c: &[u64]| {
        c.iter()
            .zip(&n)
            .map(|(&a, &b)| a as f64 / b as f64)
            .collect()
    };
    Ok(SpaceBaseRates {
        potential: rate(&pot),
        construct: rate(&con),
        observed: rate(&obs),
    })
}
