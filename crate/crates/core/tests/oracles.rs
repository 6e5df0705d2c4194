mod common;

use common::*;
use fairpost_core::postprocess::{fit_demographic_parity, fit_equalized_odds, group_geometry};
use fairpost_core::roc::hull_region_contains;
use fairpost_core::{
    build_roc, confusion_stats, demographic_parity_difference, equalized_odds_difference,
    realize_point, upper_hull, CostModel, GroupId, LabeledPredictions, ScoreSet,
};
use rand::Rng;

#[test]
fn roc_points_match_direct_recount() {
    for case in 0..60 {
        let mut r = rng(101, case);
        let scores = random_scores(&mut r, 2, 2, 40, case % 2 == 0);
        for g in 0..2 {
            let samples = group_samples(&scores, g);
            let curve = build_roc(&scores, GroupId(g)).unwrap();
            let (neg, pos) = class_sizes(&samples);
            assert_eq!((curve.negatives(), curve.positives()), (neg, pos));
            for p in curve.points() {
                assert_eq!(count_above(&samples, p.threshold), (p.fp, p.tp));
                assert_eq!(p.fpr, p.fp as f64 / neg as f64);
            }
            let mut distinct: Vec<f64> = samples.iter().map(|s| s.0).collect();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            assert_eq!(curve.points().len(), distinct.len() + 1);
        }
    }
}

#[test]
fn hull_matches_cubic_definition() {
    for case in 0..80 {
        let mut r = rng(202, case);
        let scores = random_scores(&mut r, 2, 2, 60, case % 3 == 0);
        for g in 0..2 {
            let curve = build_roc(&scores, GroupId(g)).unwrap();
            let fast: Vec<(u64, u64)> = upper_hull(&curve)
                .vertices()
                .iter()
                .map(|p| (p.fp, p.tp))
                .collect();
            assert_eq!(fast, brute_hull(&curve), "case {case} group {g}");
        }
    }
}

#[test]
fn realized_mixtures_hit_their_targets() {
    for case in 0..60 {
        let mut r = rng(303, case);
        let scores = random_scores(&mut r, 2, 3, 50, case % 2 == 1);
        let samples = group_samples(&scores, 0);
        let hull = upper_hull(&build_roc(&scores, GroupId(0)).unwrap());
        let mut hits = 0;
        while hits < 20 {
            let t = (r.random::<f64>(), r.random::<f64>());
            if !hull_region_contains(&hull, t, 0.0) {
                continue;
            }
            hits += 1;
            let m = realize_point(&hull, t).unwrap();
            let got = mixture_rates(&samples, &m);
            assert!(
                (got.0 - t.0).abs() <= 1e-12 && (got.1 - t.1).abs() <= 1e-12,
                "case {case}: target {t:?} realized {got:?} by {m:?}"
            );
        }
    }
}

#[test]
fn dp_fit_matches_grid_oracle() {
    for case in 0..40 {
        let mut r = rng(404, case);
        // sizes dividing 100 make the 1/100 grid contain every breakpoint
        let sizes = [20usize, 25, 50];
        let groups = 2 + (case as usize % 2);
        let (mut s, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..groups {
            let n = sizes[r.random_range(0..3)];
            let sep: f64 = r.random_range(0.0..2.5);
            for i in 0..n {
                let label = i % 3 == 0 || r.random::<f64>() < 0.3;
                let z: f64 = r.random_range(-1.5..1.5);
                let score = ((if label { sep } else { 0.0 } + z) * 4.0).round() / 4.0;
                s.push(score);
                y.push(label);
                g.push(GroupId(k));
            }
        }
        let scores = ScoreSet::new(s, y, g, groups).unwrap();
        let cfp: Vec<f64> = (0..groups).map(|_| r.random_range(0.2..2.0)).collect();
        let cfn: Vec<f64> = (0..groups).map(|_| r.random_range(0.2..2.0)).collect();
        let w = scores.group_proportions();
        let cost = CostModel::new(cfp.clone(), cfn.clone(), w.clone()).unwrap();
        let fit = fit_demographic_parity(&scores, &cost, None).unwrap();
        let oracle = dp_grid_optimum(&scores, &cfp, &cfn, &w);
        assert!(
            (fit.objective_value - oracle).abs() <= 1e-12,
            "case {case}: fit {} oracle {oracle}",
            fit.objective_value
        );
        assert!(fit.analytic_dp_difference() <= 1e-12);
    }
}

#[test]
fn eo_fit_matches_vertex_enumeration() {
    for case in 0..40 {
        let mut r = rng(505, case);
        let groups = 2 + (case as usize % 3);
        let scores = random_scores(&mut r, groups, 5, 80, case % 2 == 0);
        let cfp: Vec<f64> = (0..groups).map(|_| r.random_range(0.2..2.0)).collect();
        let cfn: Vec<f64> = (0..groups).map(|_| r.random_range(0.2..2.0)).collect();
        let w = scores.group_proportions();
        let cost = CostModel::new(cfp.clone(), cfn.clone(), w.clone()).unwrap();
        let fit = fit_equalized_odds(&scores, &cost).unwrap();
        let geo = group_geometry(&scores).unwrap();
        let frontiers: Vec<Vec<(f64, f64)>> = geo
            .iter()
            .map(|gg| gg.hull.vertices().iter().map(|p| (p.fpr, p.tpr)).collect())
            .collect();
        let bases: Vec<f64> = (0..groups)
            .map(|g| {
                let (neg, pos) = class_sizes(&group_samples(&scores, g));
                pos as f64 / (neg + pos) as f64
            })
            .collect();
        let (best, _) = eo_vertex_optimum(&frontiers, &cfp, &cfn, &bases, &w);
        assert!(
            (fit.objective_value - best).abs() <= 1e-9,
            "case {case}: fit {} oracle {best}",
            fit.objective_value
        );
        assert!(fit.analytic_eo_difference().unwrap() <= 1e-9);
        for g in 0..groups {
            let got = mixture_rates(&group_samples(&scores, g), &fit.policies[g]);
            let a = fit.achieved[g];
            assert!((got.0 - a.fpr.unwrap()).abs() <= 1e-12);
            assert!((got.1 - a.tpr.unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn metrics_match_recount_on_random_predictions() {
    for case in 0..30 {
        let mut r = rng(606, case);
        let groups = 2 + (case as usize % 3);
        let n = 200;
        let g: Vec<GroupId> = (0..n).map(|i| GroupId(i % groups)).collect();
        let y: Vec<bool> = (0..n)
            .map(|i| i < 2 * groups || r.random::<bool>())
            .collect();
        let y: Vec<bool> = y
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if (groups..2 * groups).contains(&i) {
                    false
                } else {
                    v
                }
            })
            .collect();
        let p: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
        let data = LabeledPredictions::new(g.clone(), y.clone(), p.clone(), groups).unwrap();
        let stats = confusion_stats(&data);
        let mut sel = vec![];
        let mut fpr = vec![];
        let mut tpr = vec![];
        for k in 0..groups {
            let idx: Vec<usize> = (0..n).filter(|&i| g[i].0 == k).collect();
            let cnt = |f: &dyn Fn(usize) -> bool| idx.iter().filter(|&&i| f(i)).count() as f64;
            sel.push(cnt(&|i| p[i]) / idx.len() as f64);
            fpr.push(cnt(&|i| p[i] && !y[i]) / cnt(&|i| !y[i]));
            tpr.push(cnt(&|i| p[i] && y[i]) / cnt(&|i| y[i]));
        }
        let gap = |v: &[f64]| {
            let mut m: f64 = 0.0;
            for a in v {
                for b in v {
                    m = m.max((a - b).abs());
                }
            }
            m
        };
        assert_eq!(demographic_parity_difference(&stats).unwrap(), gap(&sel));
        assert_eq!(
            equalized_odds_difference(&stats).unwrap(),
            gap(&fpr).max(gap(&tpr))
        );
    }
}
