//! Fixtures shared by the criterion benchmarks.

use fairpost_core::spaces::{BiasSpec, GroupBias, PopulationSpec};
use fairpost_core::ScoreSet;

/// Two-group population with unequal score informativeness.
pub fn two_group_scores(per_group: usize, seed: u64) -> ScoreSet {
    let mut weak = GroupBias::none();
    weak.informativeness = 0.8;
    let mut strong = GroupBias::none();
    strong.informativeness = 2.0;
    let spec = PopulationSpec::new(
        vec!["A".into(), "B".into()],
        vec![per_group, per_group],
        vec![0.4, 0.4],
        BiasSpec::new(vec![weak, strong]),
        seed,
    )
    .expect("valid spec");
    spec.sample().to_score_set()
}
