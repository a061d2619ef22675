#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};

use baaf::{BackendConfig, Dataset, FeatureDataset, OneClassMethod, Result, TrainedDetector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Wraps a backend and counts `fit` calls.
pub struct CountingMethod {
    pub inner: BackendConfig,
    pub calls: AtomicUsize,
}

impl CountingMethod {
    pub fn new(inner: BackendConfig) -> Self {
        CountingMethod {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl OneClassMethod<f64> for CountingMethod {
    type Model = TrainedDetector<f64>;

    fn fit(&self, train: &FeatureDataset<f64>, seed: u64) -> Result<Self::Model> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.fit(train, seed)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_rows(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(r)).collect())
        .collect()
}

/// Dataset with ids `<prefix>0..`.
pub fn dataset(prefix: &str, rows: Vec<Vec<f64>>) -> Dataset {
    let ids = (0..rows.len()).map(|i| format!("{prefix}{i}")).collect();
    Dataset::from_rows(ids, rows).unwrap()
}

/// `n` nominal N(0, I) rows followed by `anomalies` rows at distance `radius`
/// from the origin, along random directions. Ids are `n*` then `x*`.
pub fn planted(seed: u64, n: usize, anomalies: usize, dim: usize, radius: f64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = gaussian_rows(&mut r, n, dim);
    for dir in gaussian_rows(&mut r, anomalies, dim) {
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        rows.push(dir.iter().map(|v| v * radius / norm).collect());
    }
    let ids = (0..n)
        .map(|i| format!("n{i}"))
        .chain((0..anomalies).map(|i| format!("x{i}")))
        .collect();
    Dataset::from_rows(ids, rows).unwrap()
}

pub mod oracles;
