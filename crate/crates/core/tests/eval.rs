mod common;

use baaf::eval::{
    auroc, filter_precision_recall, inject_corruption, synth_generate, CorruptionSpec,
    Independence, SynthConfig,
};
use baaf::{fit, AnomalyScorer, BackendConfig, EvalLabels, Label};
use common::oracles::{brute_force_auroc, random_auroc_instance};
use common::rng;

#[test]
fn auroc_example() {
    let a = auroc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
    assert_eq!(a, 0.75);
    assert_eq!(brute_force_auroc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]), 0.75);
}

#[test]
fn auroc_matches_pair_counting() {
    let mut r = rng(2);
    for _ in 0..500 {
        let (scores, labels) = random_auroc_instance(&mut r);
        let got = auroc(&scores, &labels).unwrap();
        assert!((got - brute_force_auroc(&scores, &labels)).abs() < 1e-12);
    }
}

#[test]
fn auroc_rank_invariances() {
    let mut r = rng(3);
    for _ in 0..200 {
        let (scores, labels) = random_auroc_instance(&mut r);
        let base = auroc(&scores, &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (2.0 * s).exp() + s.powi(3)).collect();
        assert_eq!(auroc(&warped, &labels).unwrap(), base);
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        assert_eq!(auroc(&negated, &flipped).unwrap(), base);
    }
}

#[test]
fn auroc_needs_both_classes() {
    assert!(auroc(&[0.1, 0.2], &[true, true]).is_err());
    assert!(auroc(&[0.1, 0.2], &[false, false]).is_err());
    assert!(auroc(&[0.1], &[false, true]).is_err());
}

fn truth(nominal: usize, anomalous: usize) -> EvalLabels {
    (0..nominal)
        .map(|i| (format!("n{i}"), Label::Nominal))
        .chain((0..anomalous).map(|i| (format!("inj{i}"), Label::Anomalous)))
        .collect()
}

#[test]
fn precision_recall_examples() {
    let t = truth(90, 10);
    let all: Vec<String> = (0..10).map(|i| format!("inj{i}")).collect();
    let pr = filter_precision_recall(all.iter().map(String::as_str), &t).unwrap();
    assert_eq!((pr.precision, pr.recall), (Some(1.0), Some(1.0)));

    let pr = filter_precision_recall(std::iter::empty(), &t).unwrap();
    assert_eq!((pr.precision, pr.recall), (None, Some(0.0)));

    let mixed: Vec<String> = (0..8)
        .map(|i| format!("inj{i}"))
        .chain((0..4).map(|i| format!("n{i}")))
        .collect();
    let pr = filter_precision_recall(mixed.iter().map(String::as_str), &t).unwrap();
    assert_eq!(pr.precision, Some(8.0 / 12.0));
    assert_eq!(pr.recall, Some(0.8));

    let clean = truth(50, 0);
    let pr = filter_precision_recall(["n1", "n2"], &clean).unwrap();
    assert_eq!((pr.precision, pr.recall), (None, None));

    assert!(filter_precision_recall(["ghost"].into_iter(), &t).is_err());
}

#[test]
fn injected_fraction_tracks_rate() {
    let data = synth_generate::<f64>(&SynthConfig {
        dim: 4,
        n_nominal: 173,
        n_anomaly: 200,
        ..Default::default()
    })
    .unwrap();
    let pool = data.anomaly_pool().unwrap();
    for p in [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45] {
        let c = inject_corruption(&data.train, &pool, &CorruptionSpec::new(p, 1)).unwrap();
        let frac = c.injected_count() as f64 / c.dataset.len() as f64;
        assert!((frac - p).abs() <= 1.0 / 173.0, "p = {p}: {frac}");
        assert_eq!(c.truth.anomalous_ids().count(), c.injected_count());
    }
}

#[test]
fn duplicate_mode_builds_tight_groups() {
    let data = synth_generate::<f64>(&SynthConfig { dim: 8, n_nominal: 90, ..Default::default() }).unwrap();
    let pool = data.anomaly_pool().unwrap();
    let spec = CorruptionSpec::new(0.1, 4)
        .with_independence(Independence::JitteredDuplicates { copies: 3, jitter: 0.05 });
    let c = inject_corruption(&data.train, &pool, &spec).unwrap();
    assert_eq!(c.injected_count(), 10);
    let distinct: std::collections::BTreeSet<&String> = c.source_ids.iter().collect();
    assert_eq!(distinct.len(), 4);
    for group in c.injected_ids.chunks(3) {
        let rows: Vec<&[f64]> = group.iter().map(|id| c.dataset.row(c.dataset.index_of(id).unwrap())).collect();
        for row in &rows[1..] {
            let d: f64 = row.iter().zip(rows[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d < 1.0, "{d}");
        }
    }
}

#[test]
fn generator_separates_classes_for_knn() {
    for seed in 0..20 {
        let data = synth_generate::<f64>(&SynthConfig { seed, ..Default::default() }).unwrap();
        let det = fit(&BackendConfig::knn(), &data.train, 0).unwrap();
        let labels = data.test_labels.in_order(&data.test).unwrap();
        let scores = det.score_all(&data.test).unwrap();
        let mut nominal: Vec<f64> = scores.iter().zip(&labels).filter(|(_, &a)| !a).map(|(s, _)| *s).collect();
        nominal.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p95 = nominal[(0.95 * (nominal.len() - 1) as f64).round() as usize];
        let above = scores.iter().zip(&labels).filter(|(s, &a)| a && **s > p95).count();
        assert!(above * 100 >= 95 * 50, "seed {seed}: {above}/50 anomalies above the nominal p95");
        assert_eq!(det.dim(), 8);
    }
}

#[test]
fn generator_is_seed_deterministic() {
    let cfg = SynthConfig { seed: 7, ..Default::default() };
    let a = synth_generate::<f64>(&cfg).unwrap();
    let b = synth_generate::<f64>(&cfg).unwrap();
    assert_eq!(a.train, b.train);
    assert_eq!(a.test, b.test);
    let other = synth_generate::<f64>(&SynthConfig { seed: 8, ..Default::default() }).unwrap();
    assert_ne!(a.train, other.train);
}
