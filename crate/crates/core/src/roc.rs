//! Per-group ROC curves, their upper convex hulls, and randomized threshold
//! mixtures that realize any operating point inside a hull.
//!
//! Predictions follow the strict rule `Ŷ = 1 iff R > t`. A curve lists one
//! point per distinct score level, from threshold `+inf` (nobody selected,
//! point `(0, 0)`) down to `-inf` (everybody selected, point `(1, 1)`).

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{segment_distance, ConvexPolygon, Point, GEOMETRY_EPS};
use crate::metrics::{check_groups, GroupId};

/// Scores with binary labels and group membership.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
    groups: Vec<GroupId>,
    num_groups: usize,
}

impl ScoreSet {
    pub fn new(
        scores: Vec<f64>,
        labels: Vec<bool>,
        groups: Vec<GroupId>,
        num_groups: usize,
    ) -> Result<Self> {
        if scores.len() != labels.len() || labels.len() != groups.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} scores, {} labels, {} groups",
                scores.len(),
                labels.len(),
                groups.len()
            )));
        }
        if scores.is_empty() {
            return Err(Error::invalid("no samples"));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("score {i} is not finite")));
        }
        check_groups(&groups, num_groups)?;
        Ok(ScoreSet {
            scores,
            labels,
            groups,
            num_groups,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn groups(&self) -> &[GroupId] {
        &self.groups
    }

    pub fn group_ids(&self) -> impl Iterator<Item = GroupId> {
        (0..self.num_groups).map(GroupId)
    }

    /// Per-group `(size, positives)`.
    pub fn group_counts(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0usize, 0usize); self.num_groups];
        for (g, &y) in self.groups.iter().zip(&self.labels) {
            out[g.0].0 += 1;
            out[g.0].1 += usize::from(y);
        }
        out
    }

    /// Population share of each group.
    pub fn group_proportions(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.group_counts()
            .iter()
            .map(|&(size, _)| size as f64 / n)
            .collect()
    }

    /// Scores and labels of one group, in input order.
    pub fn group_samples(&self, g: GroupId) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.scores
            .iter()
            .zip(&self.labels)
            .zip(&self.groups)
            .filter(move |(_, &h)| h == g)
            .map(|((&s, &y), _)| (s, y))
    }

    /// Copy with every score passed through `f`.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        ScoreSet::new(
            self.scores.iter().map(|&s| f(s)).collect(),
            self.labels.clone(),
            self.groups.clone(),
            self.num_groups,
        )
    }
}

/// One operating point: exact counts plus derived rates and the threshold
/// that produces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
    pub fp: u64,
    pub tp: u64,
}

impl RocPoint {
    pub fn point(&self) -> Point {
        Point::new(self.fpr, self.tpr)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
    /// Distinct score levels, descending.
    levels: Vec<f64>,
    positives: u64,
    negatives: u64,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn positives(&self) -> u64 {
        self.positives
    }

    pub fn negatives(&self) -> u64 {
        self.negatives
    }

    /// The deterministic operating point of threshold `t`.
    pub fn point_at(&self, t: f64) -> RocPoint {
        let k = self.levels.partition_point(|&s| s > t);
        let mut p = self.points[k];
        p.threshold = t;
        p
    }

    /// Area under the curve by the trapezoid rule.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) * 0.5)
            .sum()
    }
}

fn by_score_desc(a: &(f64, bool), b: &(f64, bool)) -> Ordering {
    b.0.total_cmp(&a.0)
}

/// Cumulative counts of one group as the threshold sweeps down through its
/// distinct score levels. Index `k` selects the top `k` levels.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GroupSweep {
    /// Distinct score levels, descending.
    pub levels: Vec<f64>,
    /// `(fp, tp)` with the top `k` levels selected; `counts[0] == (0, 0)`.
    pub counts: Vec<(u64, u64)>,
    pub positives: u64,
    pub negatives: u64,
}

impl GroupSweep {
    pub fn new(scores: &ScoreSet, group: GroupId) -> Result<Self> {
        if group.0 >= scores.num_groups {
            return Err(Error::UnknownGroup(group.0));
        }
        Self::from_samples(scores.group_samples(group).collect()).ok_or(Error::UndefinedRate {
            group: group.0,
            rate: crate::error::RateKind::Selection,
            reason: "empty group",
        })
    }

    /// `None` for an empty sample.
    pub fn from_samples(mut samples: Vec<(f64, bool)>) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        samples.sort_by(by_score_desc);
        let mut levels = Vec::new();
        let mut counts = vec![(0u64, 0u64)];
        let (mut fp, mut tp) = (0u64, 0u64);
        for (i, &(s, y)) in samples.iter().enumerate() {
            if y {
                tp += 1;
            } else {
                fp += 1;
            }
            if samples.get(i + 1).map_or(true, |next| next.0 != s) {
                levels.push(s);
                counts.push((fp, tp));
            }
        }
        Some(GroupSweep {
            levels,
            counts,
            positives: tp,
            negatives: fp,
        })
    }

    pub fn size(&self) -> u64 {
        self.positives + self.negatives
    }

    /// Threshold selecting exactly the top `k` levels.
    pub fn threshold(&self, k: usize) -> f64 {
        if k == 0 {
            f64::INFINITY
        } else if k >= self.levels.len() {
            f64::NEG_INFINITY
        } else {
            self.levels[k]
        }
    }

    pub fn selection_rate(&self, k: usize) -> f64 {
        let (fp, tp) = self.counts[k];
        (fp + tp) as f64 / self.size() as f64
    }

    /// Index of the top-`k` selection produced by threshold `t`.
    pub fn index_of(&self, t: f64) -> usize {
        self.levels.partition_point(|&s| s > t)
    }
}

/// ROC curve of one group over all distinct-score thresholds.
pub fn build_roc(scores: &ScoreSet, group: GroupId) -> Result<RocCurve> {
    let sweep = GroupSweep::new(scores, group)?;
    RocCurve::from_sweep(&sweep, group)
}

impl RocCurve {
    pub(crate) fn from_sweep(sweep: &GroupSweep, group: GroupId) -> Result<Self> {
        let (positives, negatives) = (sweep.positives, sweep.negatives);
        if positives == 0 {
            return Err(Error::MissingClass {
                group: group.0,
                positive: true,
            });
        }
        if negatives == 0 {
            return Err(Error::MissingClass {
                group: group.0,
                positive: false,
            });
        }
        let points = sweep
            .counts
            .iter()
            .enumerate()
            .map(|(k, &(fp, tp))| RocPoint {
                fpr: fp as f64 / negatives as f64,
                tpr: tp as f64 / positives as f64,
                threshold: sweep.threshold(k),
                fp,
                tp,
            })
            .collect();
        Ok(RocCurve {
            points,
            levels: sweep.levels.clone(),
            positives,
            negatives,
        })
    }
}

/// Upper-left convex frontier of a curve, from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocHull {
    vertices: Vec<RocPoint>,
}

impl RocHull {
    pub fn vertices(&self) -> &[RocPoint] {
        &self.vertices
    }

    /// Closed region between the frontier and the chance diagonal.
    pub fn region(&self) -> ConvexPolygon {
        let mut ring = vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)];
        let inner = &self.vertices[1..self.vertices.len() - 1];
        ring.extend(inner.iter().rev().map(RocPoint::point));
        ConvexPolygon::from_ccw(ring)
    }

    pub fn area(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) * 0.5)
            .sum()
    }

    /// Largest frontier tpr at false positive rate `fpr`.
    pub fn frontier_tpr(&self, fpr: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let y = if a.fpr <= fpr && fpr <= b.fpr {
                if b.fpr > a.fpr {
                    a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr)
                } else {
                    a.tpr.max(b.tpr)
                }
            } else {
                continue;
            };
            best = Some(best.map_or(y, |v: f64| v.max(y)));
        }
        best
    }
}

/// Exact orientation of three curve points via their integer counts.
fn count_cross(o: &RocPoint, a: &RocPoint, b: &RocPoint) -> i128 {
    let (ax, ay) = (a.fp as i128 - o.fp as i128, a.tp as i128 - o.tp as i128);
    let (bx, by) = (b.fp as i128 - o.fp as i128, b.tp as i128 - o.tp as i128);
    ax * by - ay * bx
}

pub fn upper_hull(curve: &RocCurve) -> RocHull {
    // Curve points are already ordered by (fpr, tpr) ascending.
    let mut hull: Vec<RocPoint> = Vec::new();
    for p in curve.points() {
        while hull.len() >= 2 && count_cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) >= 0 {
            hull.pop();
        }
        hull.push(*p);
    }
    RocHull { vertices: hull }
}

/// Constant prediction mixed into a threshold policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantArm {
    pub positive: bool,
    pub weight: f64,
}

impl ConstantArm {
    pub fn threshold(&self) -> f64 {
        if self.positive {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }
}

/// Randomized threshold: `t_low` with probability `p`, `t_high` otherwise.
///
/// When `constant` is set the policy is a three-way mixture: with
/// probability `constant.weight` everybody gets the constant prediction and
/// the two-threshold draw applies to the remaining mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixturePolicy {
    pub t_low: f64,
    pub t_high: f64,
    pub p: f64,
    pub constant: Option<ConstantArm>,
}

impl MixturePolicy {
    pub fn deterministic(t: f64) -> Self {
        MixturePolicy {
            t_low: t,
            t_high: t,
            p: 1.0,
            constant: None,
        }
    }

    pub fn new(t_low: f64, t_high: f64, p: f64) -> Result<Self> {
        let policy = MixturePolicy {
            t_low,
            t_high,
            p,
            constant: None,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_low.is_nan() || self.t_high.is_nan() || self.t_low > self.t_high {
            return Err(Error::invalid(format!(
                "thresholds must satisfy t_low <= t_high, got {} and {}",
                self.t_low, self.t_high
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("p = {} outside [0, 1]", self.p)));
        }
        if let Some(c) = self.constant {
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(Error::invalid(format!(
                    "constant weight {} outside [0, 1]",
                    c.weight
                )));
            }
        }
        Ok(())
    }

    pub fn is_three_way(&self) -> bool {
        self.constant.is_some_and(|c| c.weight > 0.0)
    }

    /// `(threshold, probability)` for every arm with positive probability.
    pub fn components(&self) -> Vec<(f64, f64)> {
        let q = self.constant.map_or(0.0, |c| c.weight);
        let mut out = Vec::with_capacity(3);
        let w_low = (1.0 - q) * self.p;
        let w_high = (1.0 - q) * (1.0 - self.p);
        if w_low > 0.0 {
            out.push((self.t_low, w_low));
        }
        if w_high > 0.0 {
            out.push((self.t_high, w_high));
        }
        if let Some(c) = self.constant.filter(|c| c.weight > 0.0) {
            out.push((c.threshold(), c.weight));
        }
        out
    }

    pub fn is_deterministic(&self) -> bool {
        let (lo, hi) = self.random_interval();
        lo == hi
    }

    /// `(min, max)` over thresholds drawn with positive probability. Scores
    /// in `(min, max]` get a chance-dependent prediction.
    pub fn random_interval(&self) -> (f64, f64) {
        self.components()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(t, _)| {
                (lo.min(t), hi.max(t))
            })
    }

    /// Threshold selected by a uniform draw `u` in `[0, 1)`.
    pub fn draw_threshold(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        let comps = self.components();
        for &(t, w) in &comps {
            acc += w;
            if u < acc {
                return t;
            }
        }
        comps.last().map_or(self.t_high, |c| c.0)
    }

    pub fn predict(&self, score: f64, u: f64) -> bool {
        score > self.draw_threshold(u)
    }

    /// Probability of a positive prediction for `score`.
    pub fn positive_probability(&self, score: f64) -> f64 {
        self.components()
            .iter()
            .filter(|&&(t, _)| score > t)
            .map(|&(_, w)| w)
            .sum()
    }

    /// Expected `(fpr, tpr)` of the mixture on a curve.
    pub fn expected_point(&self, curve: &RocCurve) -> Point {
        self.components()
            .iter()
            .fold(Point::new(0.0, 0.0), |acc, &(t, w)| {
                acc + curve.point_at(t).point().scale(w)
            })
    }
}

/// Mixture of frontier vertices `a` (higher threshold) and `b` at parameter
/// `mu` measured from `a`.
fn segment_policy(a: &RocPoint, b: &RocPoint, mu: f64) -> MixturePolicy {
    let seg = a.point().dist(b.point());
    if mu * seg <= GEOMETRY_EPS {
        return MixturePolicy::deterministic(a.threshold);
    }
    if (1.0 - mu) * seg <= GEOMETRY_EPS {
        return MixturePolicy::deterministic(b.threshold);
    }
    MixturePolicy {
        t_low: b.threshold,
        t_high: a.threshold,
        p: mu,
        constant: None,
    }
}

/// Adds a constant arm with weight `q`, folding it into the two-threshold
/// form when the frontier part is deterministic.
fn with_constant(frontier: MixturePolicy, positive: bool, q: f64) -> MixturePolicy {
    if q <= 0.0 {
        return frontier;
    }
    if frontier.is_deterministic() {
        let t = frontier.t_low;
        return if positive {
            MixturePolicy {
                t_low: f64::NEG_INFINITY,
                t_high: t,
                p: q,
                constant: None,
            }
        } else {
            MixturePolicy {
                t_low: t,
                t_high: f64::INFINITY,
                p: 1.0 - q,
                constant: None,
            }
        };
    }
    MixturePolicy {
        constant: Some(ConstantArm {
            positive,
            weight: q,
        }),
        ..frontier
    }
}

/// Where the ray `origin + lambda * (target - origin)` leaves the hull
/// region: `(lambda, segment index, mu)` with the largest lambda.
fn ray_exit(hull: &RocHull, origin: Point, target: Point) -> Option<(f64, usize, f64)> {
    let d = target - origin;
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, w) in hull.vertices.windows(2).enumerate() {
        let a = w[0].point();
        let e = w[1].point() - a;
        let denom = d.x * e.y - d.y * e.x;
        if denom.abs() <= f64::EPSILON * d.norm() * e.norm() {
            continue;
        }
        let ao = a - origin;
        let lambda = (ao.x * e.y - ao.y * e.x) / denom;
        let mu = (ao.x * d.y - ao.y * d.x) / denom;
        if !(-1e-9..=1.0 + 1e-9).contains(&mu) || lambda < 1.0 - 1e-9 {
            continue;
        }
        if best.map_or(true, |b| lambda > b.0) {
            best = Some((lambda, i, mu.clamp(0.0, 1.0)));
        }
    }
    best
}

/// Randomized policy whose expected operating point is `target`.
///
/// Frontier targets mix the two adjacent hull vertices. Interior targets
/// are pushed along a ray from `(0, 0)` or `(1, 1)` onto the frontier and
/// mixed with the corresponding constant policy; of the two rays, the one
/// needing less constant mass wins.
pub fn realize_point(hull: &RocHull, target: (f64, f64)) -> Result<MixturePolicy> {
    let t = Point::new(target.0, target.1);
    if !t.x.is_finite() || !t.y.is_finite() {
        return Err(Error::invalid("target must be finite"));
    }
    let region = hull.region();
    if !region.contains(t, GEOMETRY_EPS) {
        return Err(Error::InfeasiblePoint {
            fpr: t.x,
            tpr: t.y,
            distance: region.boundary_distance(t),
        });
    }

    let verts = &hull.vertices;
    let mut nearest = (f64::INFINITY, 0usize);
    for (i, w) in verts.windows(2).enumerate() {
        let d = segment_distance(t, w[0].point(), w[1].point());
        if d < nearest.0 {
            nearest = (d, i);
        }
    }
    if nearest.0 <= GEOMETRY_EPS {
        let (a, b) = (&verts[nearest.1], &verts[nearest.1 + 1]);
        let e = b.point() - a.point();
        let mu = ((t - a.point()).dot(e) / e.dot(e)).clamp(0.0, 1.0);
        return Ok(segment_policy(a, b, mu));
    }

    let mut best: Option<(f64, MixturePolicy)> = None;
    for (origin, positive) in [(Point::new(0.0, 0.0), false), (Point::new(1.0, 1.0), true)] {
        if t.dist(origin) <= GEOMETRY_EPS {
            continue;
        }
        if let Some((lambda, i, mu)) = ray_exit(hull, origin, t) {
            let q = (1.0 - 1.0 / lambda).max(0.0);
            let policy = with_constant(segment_policy(&verts[i], &verts[i + 1], mu), positive, q);
            if best.map_or(true, |(bq, _)| q < bq) {
                best = Some((q, policy));
            }
        }
    }
    best.map(|(_, p)| p).ok_or(Error::InfeasiblePoint {
        fpr: t.x,
        tpr: t.y,
        distance: 0.0,
    })
}

/// Operating points achievable by every group at once.
pub fn hull_intersection(hulls: &[RocHull]) -> Result<ConvexPolygon> {
    if hulls.len() < 2 {
        return Err(Error::invalid("hull intersection needs at least two hulls"));
    }
    let mut acc = hulls[0].region();
    for h in &hulls[1..] {
        acc = acc.intersect(&h.region(), GEOMETRY_EPS);
    }
    Ok(acc)
}

/// Containment in one hull region without polygon clipping: above the
/// diagonal and below the frontier.
pub fn hull_region_contains(hull: &RocHull, p: (f64, f64), eps: f64) -> bool {
    let (x, y) = p;
    if !(-eps..=1.0 + eps).contains(&x) || y < x - eps {
        return false;
    }
    let x = x.clamp(0.0, 1.0);
    hull.frontier_tpr(x).is_some_and(|f| y <= f + eps)
}
