//! The three shipped scenarios, stored as scenario files.

/// Budgeted interviews. Every candidate benefits from an interview, group A
/// carries an unjust life's bias and systematically lower scores.
pub const RESUME_SELECTION: &str = r#"schema_version = "fairpost.scenario/1"
name = "resume_selection"
seed = 1
replicates = 10
constraint = "demographic_parity"
budget = 0.2
outputs = ["metrics", "roc_points", "utility_report"]

[population]
groups = ["A", "B"]

[population.group.A]
size = 10000
potential_base_rate = 0.5
informativeness = 1.5
score_shift = -0.5
lifes_bias = { pos_to_neg = 0.2, neg_to_pos = 0.0, tag = "unjust" }

[population.group.B]
size = 10000
potential_base_rate = 0.5
informativeness = 1.5

[utility]
reference = "potential"
default = { u11 = 1.0, u10 = 0.5, u01 = 0.0, u00 = 0.0 }

[cost]
default = { fp = 1.0, fn = 1.0 }
"#;

/// Loans without a budget. Defaults cost the lender twice a missed good
/// borrower; the difference in repayment rates is tagged as just.
pub const LENDING: &str = r#"schema_version = "fairpost.scenario/1"
name = "lending"
seed = 2
replicates = 10
constraint = "demographic_parity"
outputs = ["metrics", "roc_points", "utility_report"]

[population]
groups = ["A", "B"]

[population.group.A]
size = 10000
potential_base_rate = 0.6
informativeness = 1.5
lifes_bias = { pos_to_neg = 0.15, neg_to_pos = 0.0, tag = "just" }

[population.group.B]
size = 10000
potential_base_rate = 0.6
informativeness = 1.5

[utility]
reference = "construct"
default = { u11 = 1.0, u10 = -1.0, u01 = -0.5, u00 = 0.0 }

[cost]
default = { fp = 2.0, fn = 1.0 }
"#;

/// Screening where group A is more often asymptomatic: 30% of its sick
/// members look healthy in the recorded labels. False positives harm
/// through side effects, missed diagnoses harm more.
pub const DISEASE_DETECTION: &str = r#"schema_version = "fairpost.scenario/1"
name = "disease_detection"
seed = 3
replicates = 10
constraint = "demographic_parity"
outputs = ["metrics", "roc_points", "utility_report"]

[population]
groups = ["A", "B"]

[population.group.A]
size = 50000
potential_base_rate = 0.3
informativeness = 3.0
label_bias = { pos_to_neg = 0.3, neg_to_pos = 0.0 }

[population.group.B]
size = 50000
potential_base_rate = 0.3
informativeness = 3.0

[utility]
reference = "construct"
default = { u11 = 1.0, u10 = -1.0, u01 = -2.0, u00 = 0.0 }

[cost]
default = { fp = 1.0, fn = 3.0 }
"#;

pub const PRESET_NAMES: [&str; 3] = ["resume_selection", "lending", "disease_detection"];

/// Scenario file text for a preset name.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "resume_selection" => Some(RESUME_SELECTION),
        "lending" => Some(LENDING),
        "disease_detection" => Some(DISEASE_DETECTION),
        _ => None,
    }
}
