//! Plain-text policy files: one `key = value` per line, `#` comments.
//!
//! ```text
//! format = fairpost.policy/1
//! constraint = demographic_parity
//! groups = A,B
//! objective = 0.21
//! degenerate = false
//! seed = 42
//! group.A.t_low = 0.25
//! group.A.t_high = 0.5
//! group.A.p = 0.3
//! group.A.constant = none            # or negative:q / positive:q
//! group.A.selection_rate = 0.4
//! group.A.fpr = 0.1                  # na when undefined
//! group.A.tpr = 0.7
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::metrics::GroupTable;
use crate::postprocess::{Constraint, FairPolicy, OperatingPoint};
use crate::roc::{ConstantArm, MixturePolicy};

pub const POLICY_FORMAT: &str = "fairpost.policy/1";

/// A fitted policy with the group labels and decision seed it was applied
/// with.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyFile {
    pub groups: GroupTable,
    pub policy: FairPolicy,
    pub seed: Option<u64>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |x| x.to_string())
}

impl PolicyFile {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let p = &self.policy;
        let _ = writeln!(out, "format = {POLICY_FORMAT}");
        let _ = writeln!(out, "constraint = {}", p.constraint);
        let _ = writeln!(out, "groups = {}", self.groups.labels().join(","));
        let _ = writeln!(out, "objective = {}", p.objective_value);
        let _ = writeln!(out, "degenerate = {}", p.degenerate);
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed = {s}");
        }
        for (label, (m, a)) in self
            .groups
            .labels()
            .iter()
            .zip(p.policies.iter().zip(&p.achieved))
        {
            let constant = match m.constant {
                None => "none".to_string(),
                Some(c) if c.positive => format!("positive:{}", c.weight),
                Some(c) => format!("negative:{}", c.weight),
            };
            let _ = writeln!(out, "group.{label}.t_low = {}", m.t_low);
            let _ = writeln!(out, "group.{label}.t_high = {}", m.t_high);
            let _ = writeln!(out, "group.{label}.p = {}", m.p);
            let _ = writeln!(out, "group.{label}.constant = {constant}");
            let _ = writeln!(out, "group.{label}.selection_rate = {}", a.selection_rate);
            let _ = writeln!(out, "group.{label}.fpr = {}", opt(a.fpr));
            let _ = writeln!(out, "group.{label}.tpr = {}", opt(a.tpr));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or(Error::PolicyFormat {
                line,
                message: "expected `key = value`".into(),
            })?;
            let key = k.trim().to_string();
            if entries.contains_key(&key) {
                return Err(Error::PolicyFormat {
                    line,
                    message: format!("duplicate key {key}"),
                });
            }
            entries.insert(key, (line, v.trim().to_string()));
        }
        let mut reader = Reader { entries };
        let format = reader.take("format")?;
        if format.1 != POLICY_FORMAT {
            return Err(Error::PolicyFormat {
                line: format.0,
                message: format!("expected format {POLICY_FORMAT}"),
            });
        }
        let constraint = reader.parse_with("constraint", Constraint::parse)?;
        let (gline, glist) = reader.take("groups")?;
        let groups = GroupTable::new(glist.split(',').map(|s| s.trim().to_string()).collect())
            .map_err(|e| Error::PolicyFormat {
                line: gline,
                message: e.to_string(),
            })?;
        let objective_value = reader.number("objective")?;
        let degenerate = reader.parse_with("degenerate", |s| s.parse().ok())?;
        let seed = if reader.entries.contains_key("seed") {
            Some(reader.parse_with("seed", |s| s.parse().ok())?)
        } else {
            None
        };
        let mut policies = Vec::new();
        let mut achieved = Vec::new();
        for label in groups.labels() {
            let key = |f: &str| format!("group.{label}.{f}");
            let (cline, cval) = reader.take(&key("constant"))?;
            let constant = parse_constant(&cval).ok_or(Error::PolicyFormat {
                line: cline,
                message: format!("bad constant arm {cval:?}"),
            })?;
            let m = MixturePolicy {
                t_low: reader.number(&key("t_low"))?,
                t_high: reader.number(&key("t_high"))?,
                p: reader.number(&key("p"))?,
                constant,
            };
            m.validate().map_err(|e| Error::PolicyFormat {
                line: cline,
                message: e.to_string(),
            })?;
            policies.push(m);
            achieved.push(OperatingPoint {
                selection_rate: reader.number(&key("selection_rate"))?,
                fpr: reader.optional_number(&key("fpr"))?,
                tpr: reader.optional_number(&key("tpr"))?,
            });
        }
        if let Some((k, (line, _))) = reader.entries.iter().next() {
            return Err(Error::PolicyFormat {
                line: *line,
                message: format!("unexpected key {k}"),
            });
        }
        Ok(PolicyFile {
            groups,
            policy: FairPolicy {
                policies,
                constraint,
                achieved,
                objective_value,
                degenerate,
            },
            seed,
        })
    }
}

fn parse_constant(s: &str) -> Option<Option<ConstantArm>> {
    if s == "none" {
        return Some(None);
    }
    let (kind, w) = s.split_once(':')?;
    let positive = match kind {
        "positive" => true,
        "negative" => false,
        _ => return None,
    };
    Some(Some(ConstantArm {
        positive,
        weight: w.parse().ok()?,
    }))
}

struct Reader {
    entries: BTreeMap<String, (usize, String)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Result<(usize, String)> {
        self.entries.remove(key).ok_or_else(|| Error::PolicyFormat {
            line: 0,
            message: format!("missing key {key}"),
        })
    }

    fn parse_with<T>(&mut self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<T> {
        let (line, v) = self.take(key)?;
        f(&v).ok_or(Error::PolicyFormat {
            line,
            message: format!("bad value {v:?} for {key}"),
        })
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        self.parse_with(key, |s| s.parse::<f64>().ok().filter(|x| !x.is_nan()))
    }

    fn optional_number(&mut self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, |s| {
            if s == "na" {
                Some(None)
            } else {
                s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Some)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PolicyFile {
        PolicyFile {
            groups: GroupTable::new(vec!["A".into(), "B".into()]).unwrap(),
            policy: FairPolicy {
                policies: vec![
                    MixturePolicy {
                        t_low: 0.1,
                        t_high: 0.30000000000000004,
                        p: 0.25,
                        constant: None,
                    },
                    MixturePolicy {
                        t_low: f64::NEG_INFINITY,
                        t_high: f64::INFINITY,
                        p: 0.5,
                        constant: Some(ConstantArm {
                            positive: false,
                            weight: 0.125,
                        }),
                    },
                ],
                constraint: Constraint::EqualizedOdds,
                achieved: vec![
                    OperatingPoint {
                        selection_rate: 0.4,
                        fpr: Some(0.1),
                        tpr: None,
                    },
                    OperatingPoint {
                        selection_rate: 0.5,
                        fpr: Some(0.2),
                        tpr: Some(0.9),
                    },
                ],
                objective_value: 0.2,
                degenerate: false,
            },
            seed: Some(9),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let p = sample();
        let text = p.render();
        assert_eq!(PolicyFile::parse(&text).unwrap(), p);
        assert!(text.contains("t_low = -inf"));
        assert!(text.contains("tpr = na"));
    }

    #[test]
    fn missing_and_unknown_keys() {
        let text = sample().render();
        let without = text.replace("group.B.p = 0.5\n", "");
        assert!(matches!(
            PolicyFile::parse(&without),
            Err(Error::PolicyFormat { .. })
        ));
        let extra = format!("{text}stray = 1\n");
        match PolicyFile::parse(&extra) {
            Err(Error::PolicyFormat { line, .. }) => assert_eq!(line, text.lines().count() + 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_report_their_line() {
        let text = sample()
            .render()
            .replace("group.A.p = 0.25", "group.A.p = lots");
        let line = text.lines().position(|l| l.contains("lots")).unwrap() + 1;
        match PolicyFile::parse(&text) {
            Err(Error::PolicyFormat { line: l, .. }) => assert_eq!(l, line),
            other => panic!("{other:?}"),
        }
    }
}
