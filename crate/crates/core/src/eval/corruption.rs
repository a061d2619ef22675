//! Injection of anomalies into a nominal training set.

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{EvalLabels, FeatureDataset, Label};
use crate::error::{param_err, Result};
use crate::partition::rng;
use crate::scalar::Scalar;

/// How the corruption rate maps to an anomaly count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Rate is the anomaly fraction of the corrupted set: `a = p / (1 - p) * |train|`.
    #[default]
    FractionOfCorrupted,
    /// Rate is relative to the nominal count: `a = p * |train|`.
    FractionOfNominal,
}

/// Whether injected anomalies also stay in the test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    #[default]
    Overlapping,
    NonOverlapping,
}

/// Independence structure of the injected anomalies.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Independence {
    /// Distinct pool anomalies drawn without replacement.
    #[default]
    Iid,
    /// Groups of `copies` near-duplicates: one pool anomaly plus jittered
    /// copies with per-coordinate Gaussian noise of standard deviation `jitter`.
    JitteredDuplicates { copies: usize, jitter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    /// Corruption rate in `[0, 0.5)`.
    pub rate: f64,
    #[serde(default)]
    pub convention: RateConvention,
    #[serde(default)]
    pub overlap: Overlap,
    #[serde(default)]
    pub independence: Independence,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(rate: f64, seed: u64) -> Self {
        CorruptionSpec {
            rate,
            convention: RateConvention::default(),
            overlap: Overlap::default(),
            independence: Independence::default(),
            seed,
        }
    }

    pub fn with_independence(mut self, independence: Independence) -> Self {
        self.independence = independence;
        self
    }

    /// Number of anomalies to inject into `train_len` nominal samples.
    pub fn injected_count(&self, train_len: usize) -> Result<usize> {
        if !(0.0..0.5).contains(&self.rate) {
            return Err(param_err!("corruption rate must lie in [0, 0.5), got {}", self.rate));
        }
        let n = train_len as f64;
        let a = match self.convention {
            RateConvention::FractionOfCorrupted => self.rate * n / (1.0 - self.rate),
            RateConvention::FractionOfNominal => self.rate * n,
        };
        Ok(a.round() as usize)
    }
}

/// A corrupted training set with its hidden ground truth.
#[derive(Debug, Clone)]
pub struct Corrupted<S> {
    /// Nominal training samples followed by the injected anomalies.
    pub dataset: FeatureDataset<S>,
    /// Labels of every sample in `dataset`.
    pub truth: EvalLabels,
    pub injected_ids: Vec<String>,
    /// Pool id each injected sample was derived from.
    pub source_ids: Vec<String>,
}

impl<S> Corrupted<S> {
    pub fn injected_count(&self) -> usize {
        self.injected_ids.len()
    }
}

/// Adds anomalies from `pool` to `train`.
///
/// Injected samples get ids `inj<k>`; their pool sources remain wherever the
/// pool came from (overlapping protocol).
pub fn inject_corruption<S: Scalar>(
    train: &FeatureDataset<S>,
    pool: &FeatureDataset<S>,
    spec: &CorruptionSpec,
) -> Result<Corrupted<S>> {
    let count = spec.injected_count(train.len())?;
    if count > 0 && pool.dim() != train.dim() {
        return Err(param_err!(
            "anomaly pool has dimension {}, training set {}",
            pool.dim(),
            train.dim()
        ));
    }
    let mut r = rng(spec.seed);
    let mut sources: Vec<usize> = Vec::with_capacity(count);
    let mut rows: Vec<S> = Vec::with_capacity(count * train.dim());
    match spec.independence {
        Independence::Iid => {
            if count > pool.len() {
                return Err(param_err!(
                    "need {count} anomalies but the pool holds {}",
                    pool.len()
                ));
            }
            for i in sample(&mut r, pool.len(), count).into_iter() {
                sources.push(i);
                rows.extend_from_slice(pool.row(i));
            }
        }
        Independence::JitteredDuplicates { copies, jitter } => {
            if copies == 0 || !(jitter >= 0.0) {
                return Err(param_err!("duplicate groups need copies >= 1 and jitter >= 0"));
            }
            let groups = count.div_ceil(copies);
            if groups > pool.len() {
                return Err(param_err!(
                    "need {groups} base anomalies but the pool holds {}",
                    pool.len()
                ));
            }
            let noise = Normal::new(0.0, jitter).map_err(|e| param_err!("{e}"))?;
            let bases = sample(&mut r, pool.len(), groups).into_vec();
            'outer: for &b in &bases {
                for c in 0..copies {
                    if sources.len() == count {
                        break 'outer;
                    }
                    sources.push(b);
                    if c == 0 {
                        rows.extend_from_slice(pool.row(b));
                    } else {
                        rows.extend(pool.row(b).iter().map(|&v| v + S::lit(noise.sample(&mut r))));
                    }
                }
            }
        }
    }
    let injected_ids: Vec<String> = (0..sources.len()).map(|k| format!("inj{k}")).collect();
    let injected = FeatureDataset::new(injected_ids.clone(), train.dim(), rows)?;
    let dataset = if injected.is_empty() {
        train.clone()
    } else {
        train.concat(&injected)?
    };
    let truth = train
        .ids()
        .iter()
        .map(|id| (id.clone(), Label::Nominal))
        .chain(injected_ids.iter().map(|id| (id.clone(), Label::Anomalous)))
        .collect();
    Ok(Corrupted {
        dataset,
        truth,
        injected_ids,
        source_ids: sources.iter().map(|&i| pool.id(i).to_string()).collect(),
    })
}
