//! Independent reference implementations used by the property and acceptance tests.

use baaf::gmm::Component;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `ln(pi_0 N_0(x)) - ln(pi_1 N_1(x))`, straight from the density formula.
pub fn log_density_gap(c: &[Component<f64>; 2], x: f64) -> f64 {
    let ln = |p: &Component<f64>| {
        p.weight.ln()
            - 0.5 * (2.0 * std::f64::consts::PI * p.variance).ln()
            - (x - p.mean).powi(2) / (2.0 * p.variance)
    };
    ln(&c[0]) - ln(&c[1])
}

/// Root of the density gap on `(lo, hi)` by bisection; needs a sign change.
pub fn bisect_crossover(c: &[Component<f64>; 2]) -> Option<f64> {
    let (mut lo, mut hi) = (c[0].mean, c[1].mean);
    let (flo, fhi) = (log_density_gap(c, lo), log_density_gap(c, hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_density_gap(c, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Random components on `[0, 1]` whose densities cross between the means.
pub fn random_crossing_components(r: &mut ChaCha8Rng) -> [Component<f64>; 2] {
    loop {
        let m0: f64 = r.random_range(0.0..0.9);
        let m1: f64 = r.random_range(m0 + 0.01..1.0);
        let pi0: f64 = r.random_range(0.05..0.95);
        let c = [
            Component { weight: pi0, mean: m0, variance: 10f64.powf(r.random_range(-4.0..-1.0)) },
            Component { weight: 1.0 - pi0, mean: m1, variance: 10f64.powf(r.random_range(-4.0..-1.0)) },
        ];
        if bisect_crossover(&c).is_some() {
            return c;
        }
    }
}

/// A mostly-low mixture of scores in `[0, 1]` with filter-style weights `1 - v`.
pub fn random_score_fixture(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = r.random_range(20..200);
    let frac: f64 = r.random_range(0.0..0.4);
    let lo_mu: f64 = r.random_range(0.05..0.4);
    let hi_mu: f64 = r.random_range(0.5..0.95);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let (mu, sd) = if r.random_bool(frac) { (hi_mu, 0.08) } else { (lo_mu, 0.05) };
            let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, r);
            (mu + sd * z).clamp(0.0, 1.0)
        })
        .collect();
    let weights = if r.random_bool(0.5) {
        values.iter().map(|v| 1.0 - v).collect()
    } else {
        (0..n).map(|_| r.random_range(0.0..=1.0)).collect()
    };
    (values, weights)
}

/// AUROC as the fraction of (anomaly, nominal) pairs ranked correctly, ties counting half.
pub fn brute_force_auroc(scores: &[f64], anomalous: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &a) in anomalous.iter().enumerate() {
        if !a {
            continue;
        }
        for (j, &b) in anomalous.iter().enumerate() {
            if b {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Random scores (with deliberate ties) and labels containing both classes.
pub fn random_auroc_instance(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<bool>) {
    loop {
        let n = r.random_range(2..=30);
        let levels = r.random_range(2..12);
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if r.random_bool(0.5) {
                    r.random_range(0..levels) as f64 / levels as f64
                } else {
                    r.random_range(-3.0..3.0)
                }
            })
            .collect();
        let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        if labels.iter().any(|&l| l) && labels.iter().any(|&l| !l) {
            return (scores, labels);
        }
    }
}
