//! Slow, obviously-correct reference implementations used as oracles.
#![allow(dead_code)]

use fairpost_core::rng::stream_rng;
use fairpost_core::{GroupId, MixturePolicy, RocCurve, ScoreSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    stream_rng(seed, stream)
}

/// Random scored groups. Both classes are present in every group; `ties`
/// rounds scores to one decimal so that levels repeat.
pub fn random_scores(
    rng: &mut ChaCha8Rng,
    groups: usize,
    n_lo: usize,
    n_hi: usize,
    ties: bool,
) -> ScoreSet {
    let (mut s, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..groups {
        let n = rng.random_range(n_lo..=n_hi);
        let sep: f64 = rng.random_range(-0.5..3.0);
        let base: f64 = rng.random_range(0.2..0.8);
        for i in 0..n {
            let label = match i {
                0 => true,
                1 => false,
                _ => rng.random::<f64>() < base,
            };
            let z: f64 = rng.sample(StandardNormal);
            let mut score = if label { sep / 2.0 } else { -sep / 2.0 } + z;
            if ties {
                score = (score * 10.0).round() / 10.0;
            }
            s.push(score);
            y.push(label);
            g.push(GroupId(k));
        }
    }
    ScoreSet::new(s, y, g, groups).unwrap()
}

pub fn group_samples(scores: &ScoreSet, g: usize) -> Vec<(f64, bool)> {
    scores.group_samples(GroupId(g)).collect()
}

/// `(fp, tp)` of the rule `score > t`, by direct counting.
pub fn count_above(samples: &[(f64, bool)], t: f64) -> (u64, u64) {
    let mut c = (0, 0);
    for &(s, y) in samples {
        if s > t {
            if y {
                c.1 += 1;
            } else {
                c.0 += 1;
            }
        }
    }
    c
}

pub fn class_sizes(samples: &[(f64, bool)]) -> (u64, u64) {
    let pos = samples.iter().filter(|s| s.1).count() as u64;
    (samples.len() as u64 - pos, pos)
}

/// Expected `(fpr, tpr)` of a mixture, arm by arm.
pub fn mixture_rates(samples: &[(f64, bool)], m: &MixturePolicy) -> (f64, f64) {
    let (neg, pos) = class_sizes(samples);
    let q = m.constant.map_or(0.0, |c| c.weight);
    let mut arms = vec![
        (m.t_low, (1.0 - q) * m.p),
        (m.t_high, (1.0 - q) * (1.0 - m.p)),
    ];
    if let Some(c) = m.constant {
        arms.push((
            if c.positive {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
            q,
        ));
    }
    let (mut f, mut t) = (0.0, 0.0);
    for (th, w) in arms {
        let (fp, tp) = count_above(samples, th);
        f += w * fp as f64 / neg as f64;
        t += w * tp as f64 / pos as f64;
    }
    (f, t)
}

fn cross(o: (i128, i128), a: (i128, i128), b: (i128, i128)) -> i128 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper hull vertices in count space by the cubic definition: the two
/// corners plus every point strictly above each chord that spans it.
pub fn brute_hull(curve: &RocCurve) -> Vec<(u64, u64)> {
    let mut pts: Vec<(i128, i128)> = curve
        .points()
        .iter()
        .map(|p| (p.fp as i128, p.tp as i128))
        .collect();
    pts.sort();
    pts.dedup();
    let first = pts[0];
    let last = *pts.last().unwrap();
    let mut out = Vec::new();
    for &p in &pts {
        if p == first || p == last {
            out.push(p);
            continue;
        }
        let mut vertex = true;
        'pairs: for &a in &pts {
            for &b in &pts {
                if a == p || b == p || a.0 > p.0 || p.0 > b.0 || a.0 >= b.0 {
                    continue;
                }
                if cross(a, b, p) <= 0 {
                    vertex = false;
                    break 'pairs;
                }
            }
        }
        // a point straight below another one at the same fpr is never a vertex
        if pts.iter().any(|&q| q.0 == p.0 && q.1 > p.1) {
            vertex = false;
        }
        if vertex {
            out.push(p);
        }
    }
    out.into_iter().map(|(x, y)| (x as u64, y as u64)).collect()
}

pub fn cost_of(cfp: f64, cfn: f64, base: f64, fpr: f64, tpr: f64) -> f64 {
    cfp * (1.0 - base) * fpr + cfn * base * (1.0 - tpr)
}

/// Minimum demographic-parity objective over common selection rates on a
/// 1/100 grid, each group selecting its top members and randomizing only
/// inside the level that straddles the cut. Exact when every group size
/// divides 100.
pub fn dp_grid_optimum(scores: &ScoreSet, cfp: &[f64], cfn: &[f64], weights: &[f64]) -> f64 {
    let groups: Vec<Vec<(f64, bool)>> = (0..scores.num_groups())
        .map(|g| {
            let mut s = group_samples(scores, g);
            s.sort_by(|a, b| b.0.total_cmp(&a.0));
            s
        })
        .collect();
    let mut best = f64::INFINITY;
    for step in 0..=100 {
        let rate = step as f64 / 100.0;
        let mut total = 0.0;
        for (g, s) in groups.iter().enumerate() {
            let n = s.len();
            let (neg, pos) = class_sizes(s);
            let want = rate * n as f64;
            // members strictly above the straddling level, then a fraction of it
            let (mut fp, mut tp) = (0.0, 0.0);
            let mut taken = 0usize;
            let mut i = 0;
            while i < n {
                let mut j = i;
                while j < n && s[j].0 == s[i].0 {
                    j += 1;
                }
                let size = (j - i) as f64;
                let lp = s[i..j].iter().filter(|x| x.1).count() as f64;
                let remaining = want - taken as f64;
                if remaining <= 0.0 {
                    break;
                }
                let frac = (remaining / size).min(1.0);
                fp += frac * (size - lp);
                tp += frac * lp;
                taken = j;
                i = j;
            }
            let cost = (cfp[g] * fp + cfn[g] * (pos as f64 - tp)) / n as f64;
            let _ = neg;
            total += weights[g] * cost;
        }
        best = best.min(total);
    }
    best
}

/// Closed region of one hull as edges: frontier plus chance diagonal.
fn region_edges(frontier: &[(f64, f64)]) -> Vec<((f64, f64), (f64, f64))> {
    let mut e: Vec<_> = frontier.windows(2).map(|w| (w[0], w[1])).collect();
    e.push(((0.0, 0.0), (1.0, 1.0)));
    e
}

fn seg_intersection(
    (a, b): ((f64, f64), (f64, f64)),
    (c, d): ((f64, f64), (f64, f64)),
) -> Option<(f64, f64)> {
    let r = (b.0 - a.0, b.1 - a.1);
    let s = (d.0 - c.0, d.1 - c.1);
    let den = r.0 * s.1 - r.1 * s.0;
    if den.abs() < 1e-15 {
        return None;
    }
    let ca = (c.0 - a.0, c.1 - a.1);
    let t = (ca.0 * s.1 - ca.1 * s.0) / den;
    let u = (ca.0 * r.1 - ca.1 * r.0) / den;
    ((-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u))
        .then_some((a.0 + t * r.0, a.1 + t * r.1))
}

/// Largest frontier tpr at `x` by scanning every frontier segment.
pub fn frontier_at(frontier: &[(f64, f64)], x: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for w in frontier.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 <= x && x <= b.0 {
            let y = if b.0 > a.0 {
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            } else {
                a.1.max(b.1)
            };
            best = best.max(y);
        }
    }
    best
}

pub fn in_region(frontier: &[(f64, f64)], p: (f64, f64), eps: f64) -> bool {
    (-eps..=1.0 + eps).contains(&p.0)
        && p.1 >= p.0 - eps
        && p.1 <= frontier_at(frontier, p.0.clamp(0.0, 1.0)) + eps
}

/// Minimum of the equalized-odds objective over the common feasible
/// region, by enumerating every hull vertex and every pairwise edge
/// crossing that all groups can reach.
pub fn eo_vertex_optimum(
    frontiers: &[Vec<(f64, f64)>],
    cfp: &[f64],
    cfn: &[f64],
    bases: &[f64],
    weights: &[f64],
) -> (f64, (f64, f64)) {
    let mut candidates: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 1.0)];
    for f in frontiers {
        candidates.extend(f.iter().copied());
    }
    let edges: Vec<_> = frontiers.iter().map(|f| region_edges(f)).collect();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            for &e1 in &edges[i] {
                for &e2 in &edges[j] {
                    if let Some(p) = seg_intersection(e1, e2) {
                        candidates.push(p);
                    }
                }
            }
        }
    }
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for p in candidates {
        if !frontiers.iter().all(|f| in_region(f, p, 1e-9)) {
            continue;
        }
        let v: f64 = (0..weights.len())
            .map(|g| weights[g] * cost_of(cfp[g], cfn[g], bases[g], p.0, p.1))
            .sum();
        if v < best.0 {
            best = (v, p);
        }
    }
    best
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
