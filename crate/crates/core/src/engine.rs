//! Bagged cross-prediction filtering of a training set.
//!
//! One vote splits the data into `n` disjoint bags, trains one detector per
//! bag, and lets every detector score all samples outside its own bag. Scores
//! are min-max normalized; for each bag a weighted two-component Gaussian
//! mixture over the pooled predictions of the other `n - 1` detectors gives a
//! threshold. A sample is removed in that vote when a strict majority of the
//! `n - 1` detectors put it above its bag's threshold. Votes are combined by a
//! per-sample strict majority and a final detector is trained on the kept set.
//!
//! Training cost is `k * n + 1` detector fits for `k` votes and `n` bags.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{AnomalyScorer, BackendConfig, OneClassMethod, TrainedDetector};
use crate::data::FeatureDataset;
use crate::error::{param_err, BaafError, Result};
use crate::gmm::{self, EmOptions, GmmFit, NormalizationMode};
use crate::partition::{derive_seed, random_split, BagPartition};
use crate::scalar::Scalar;
use crate::video::{self, ClipDecision, VideoConfig};

pub const REPORT_FORMAT: &str = "baaf-filter-report";
pub const REPORT_VERSION: u32 = 1;

const FINAL_FIT_STREAM: u64 = u64::MAX;

/// A fitted upper component holding at least this much of the weighted mass
/// has split the nominal mode rather than isolated anomalies, and the bag
/// falls back to the moment threshold.
pub const MAX_ANOMALOUS_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaafConfig {
    pub n_bags: usize,
    pub k_votes: usize,
    pub backend: BackendConfig,
    #[serde(default)]
    pub normalization: NormalizationMode,
    pub master_seed: u64,
    /// Clip post-processing; only valid for datasets with clip structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<VideoConfig>,
}

impl Default for BaafConfig {
    /// BAAF(1/4) with the kNN memory bank.
    fn default() -> Self {
        BaafConfig {
            n_bags: 4,
            k_votes: 1,
            backend: BackendConfig::default(),
            normalization: NormalizationMode::Global,
            master_seed: 0,
            video: None,
        }
    }
}

impl BaafConfig {
    pub fn new(k_votes: usize, n_bags: usize) -> Self {
        BaafConfig {
            k_votes,
            n_bags,
            ..Default::default()
        }
    }

    pub fn with_backend(mut self, backend: BackendConfig) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_normalization(mut self, mode: NormalizationMode) -> Self {
        self.normalization = mode;
        self
    }

    /// `BAAF(votes/bags)`.
    pub fn name(&self) -> String {
        format!("BAAF({}/{})", self.k_votes, self.n_bags)
    }

    /// Parses `"k/n"` (votes/bags), optionally wrapped as `BAAF(k/n)`.
    pub fn parse_votes_bags(s: &str) -> Result<(usize, usize)> {
        let inner = s
            .trim()
            .strip_prefix("BAAF(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(s.trim());
        let (k, n) = inner
            .split_once('/')
            .ok_or_else(|| param_err!("expected votes/bags, got {s:?}"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| param_err!("expected votes/bags, got {s:?}"))
        };
        Ok((parse(k)?, parse(n)?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bags < 2 {
            return Err(param_err!("need at least 2 bags, got {}", self.n_bags));
        }
        if self.k_votes < 1 {
            return Err(param_err!("need at least 1 vote"));
        }
        if let Some(v) = &self.video {
            v.validate()?;
        }
        Ok(())
    }

    /// Detector fits a full run performs.
    pub fn expected_fit_calls(&self) -> usize {
        self.k_votes * self.n_bags + 1
    }
}

/// Seed of the vote's random split.
pub fn vote_seed(master: u64, vote: usize) -> u64 {
    derive_seed(&[master, vote as u64])
}

/// Training seed of one bag's detector.
pub fn bag_seed(master: u64, vote: usize, bag: usize) -> u64 {
    derive_seed(&[master, vote as u64, bag as u64])
}

/// Training seed of the final detector.
pub fn final_fit_seed(master: u64) -> u64 {
    derive_seed(&[master, FINAL_FIT_STREAM])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    Crossover,
    /// Weighted mean + 3 weighted standard deviations of the pooled predictions.
    Fallback,
}

/// Threshold of one target bag within a vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Scalar"))]
pub struct BagThreshold<S> {
    pub bag: usize,
    pub size: usize,
    /// Number of pooled predictions the mixture was fit on.
    pub pooled: usize,
    pub threshold: S,
    pub source: ThresholdSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gmm: Option<GmmFit<S>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<String>,
}

/// Everything one vote decided.
///
/// `normalized_predictions[j]` holds model `j`'s normalized scores for the
/// samples outside bag `j`, in ascending sample order. Per-sample vectors are
/// aligned with the dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Scalar"))]
pub struct VoteRecord<S> {
    pub vote_index: usize,
    pub partition: BagPartition,
    pub bag_of: Vec<usize>,
    pub thresholds: Vec<BagThreshold<S>>,
    pub normalized_predictions: Vec<Vec<S>>,
    /// Models whose normalization group had zero range.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constant_groups: Vec<usize>,
    /// Number of the `n - 1` out-of-bag models scoring the sample above threshold.
    pub anomalous_votes: Vec<u32>,
    pub removed: Vec<bool>,
    pub fit_calls: usize,
}

impl<S> VoteRecord<S> {
    pub fn n_bags(&self) -> usize {
        self.partition.bags.len()
    }

    pub fn removed_count(&self) -> usize {
        self.removed.iter().filter(|&&r| r).count()
    }

    /// Samples outside bag `model`, ascending; the index set of
    /// `normalized_predictions[model]`.
    pub fn targets_of(&self, model: usize) -> Vec<usize> {
        (0..self.bag_of.len())
            .filter(|&x| self.bag_of[x] != model)
            .collect()
    }
}

/// Strict majority of `voters`: more than half.
pub fn is_strict_majority(count: usize, voters: usize) -> bool {
    2 * count > voters
}

/// Filter-quality numbers computed against hidden ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEvaluation {
    pub true_anomalies: usize,
    pub removed: usize,
    pub removed_anomalies: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Scalar"))]
pub struct FilterReport<S> {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub config: BaafConfig,
    pub sample_ids: Vec<String>,
    pub votes: Vec<VoteRecord<S>>,
    /// Votes (out of `k`) in which each sample was kept.
    pub kept_in_votes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clips: Option<Vec<ClipDecision>>,
    pub kept: Vec<String>,
    pub removed: Vec<String>,
    pub final_fit_seed: u64,
    pub total_fit_calls: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<FilterEvaluation>,
}

impl<S: Scalar> FilterReport<S> {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| BaafError::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| BaafError::Data(e.to_string()))?;
        if report.format != REPORT_FORMAT || report.version != REPORT_VERSION {
            return Err(BaafError::Data(format!(
                "unsupported report {} v{}",
                report.format, report.version
            )));
        }
        Ok(report)
    }

    /// Dataset row indices of the kept samples.
    pub fn kept_indices(&self) -> Vec<usize> {
        let kept: std::collections::HashSet<&str> = self.kept.iter().map(String::as_str).collect();
        self.sample_ids
            .iter()
            .enumerate()
            .filter(|(_, id)| kept.contains(id.as_str()))
            .map(|(i, _)| i)
            .collect()
    }
}

fn check_dataset<S: Scalar>(dataset: &FeatureDataset<S>, config: &BaafConfig) -> Result<()> {
    config.validate()?;
    if dataset.len() < 2 * config.n_bags {
        return Err(param_err!(
            "{} samples are too few for {} bags (need at least {})",
            dataset.len(),
            config.n_bags,
            2 * config.n_bags
        ));
    }
    dataset.ensure_finite()
}

/// Runs one vote with the configured backend.
pub fn run_vote<S: Scalar>(
    dataset: &FeatureDataset<S>,
    config: &BaafConfig,
    vote_index: usize,
) -> Result<VoteRecord<S>> {
    run_vote_with(dataset, config, &config.backend, vote_index)
}

/// Runs one vote with an arbitrary one-class method.
pub fn run_vote_with<S: Scalar, M: OneClassMethod<S>>(
    dataset: &FeatureDataset<S>,
    config: &BaafConfig,
    method: &M,
    vote_index: usize,
) -> Result<VoteRecord<S>> {
    check_dataset(dataset, config)?;
    vote_unchecked(dataset, config, method, vote_index, &EmOptions::default())
}

fn vote_unchecked<S: Scalar, M: OneClassMethod<S>>(
    dataset: &FeatureDataset<S>,
    config: &BaafConfig,
    method: &M,
    vote_index: usize,
    em: &EmOptions,
) -> Result<VoteRecord<S>> {
    let n = config.n_bags;
    let partition = random_split(dataset, n, vote_seed(config.master_seed, vote_index))?;
    let bag_of = partition.assignment(dataset.len());
    let fit_calls = AtomicUsize::new(0);

    let models: Vec<M::Model> = partition
        .bags
        .par_iter()
        .enumerate()
        .map(|(j, bag)| {
            let train = dataset.subset(bag)?;
            fit_calls.fetch_add(1, Ordering::Relaxed);
            method.fit(&train, bag_seed(config.master_seed, vote_index, j))
        })
        .collect::<Result<_>>()?;

    let raw: Vec<Vec<S>> = models
        .par_iter()
        .enumerate()
        .map(|(j, model)| {
            (0..dataset.len())
                .filter(|&x| bag_of[x] != j)
                .map(|x| model.score(dataset.row(x)))
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<_>>()?;
    drop(models);

    let normalized = gmm::normalize_scores(&raw, config.normalization)?;
    let groups = normalized.groups;

    // Dense [model][sample] view; entries for a model's own bag are unused.
    let mut dense = vec![vec![S::nan(); dataset.len()]; n];
    for (j, group) in groups.iter().enumerate() {
        let targets = (0..dataset.len()).filter(|&x| bag_of[x] != j);
        for (x, &v) in targets.zip(group) {
            dense[j][x] = v;
        }
    }

    let thresholds: Vec<BagThreshold<S>> = partition
        .bags
        .par_iter()
        .enumerate()
        .map(|(i, bag)| {
            let mut values = Vec::with_capacity(bag.len() * (n - 1));
            for (j, row) in dense.iter().enumerate() {
                if j != i {
                    values.extend(bag.iter().map(|&x| row[x]));
                }
            }
            let weights: Vec<S> = values.iter().map(|&v| S::one() - v).collect();
            bag_threshold(i, bag.len(), &values, &weights, em)
        })
        .collect::<Result<_>>()?;

    let mut anomalous_votes = vec![0u32; dataset.len()];
    let mut removed = vec![false; dataset.len()];
    for x in 0..dataset.len() {
        let i = bag_of[x];
        let t = thresholds[i].threshold;
        let count = (0..n).filter(|&j| j != i && dense[j][x] > t).count();
        anomalous_votes[x] = count as u32;
        removed[x] = is_strict_majority(count, n - 1);
    }

    Ok(VoteRecord {
        vote_index,
        partition,
        bag_of,
        thresholds,
        normalized_predictions: groups,
        constant_groups: normalized.constant_groups,
        anomalous_votes,
        removed,
        fit_calls: fit_calls.into_inner(),
    })
}

fn bag_threshold<S: Scalar>(
    bag: usize,
    size: usize,
    values: &[S],
    weights: &[S],
    em: &EmOptions,
) -> Result<BagThreshold<S>> {
    let fitted = gmm::fit_weighted_gmm_with(values, weights, em).and_then(|fit| {
        let w = fit.anomalous().weight;
        if w >= S::lit(MAX_ANOMALOUS_WEIGHT) {
            Err(BaafError::Degenerate(format!(
                "anomalous component carries {w} of the weighted mass"
            )))
        } else {
            Ok(fit)
        }
    });
    match fitted {
        Ok(fit) => Ok(BagThreshold {
            bag,
            size,
            pooled: values.len(),
            threshold: fit.threshold,
            source: ThresholdSource::Crossover,
            gmm: Some(fit),
            fallback_reason: None,
        }),
        Err(e @ (BaafError::Degenerate(_) | BaafError::Parameter(_))) => Ok(BagThreshold {
            bag,
            size,
            pooled: values.len(),
            threshold: gmm::fallback_threshold(values, weights),
            source: ThresholdSource::Fallback,
            gmm: None,
            fallback_reason: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Keeps a sample iff it was kept in a strict majority of the votes; ties remove.
pub fn aggregate_votes<S>(records: &[VoteRecord<S>]) -> Result<Vec<bool>> {
    let first = records
        .first()
        .ok_or_else(|| param_err!("cannot aggregate zero votes"))?;
    let len = first.removed.len();
    if records.iter().any(|r| r.removed.len() != len) {
        return Err(BaafError::Internal(
            "votes cover different sample sets".into(),
        ));
    }
    Ok((0..len)
        .map(|x| {
            let kept = records.iter().filter(|r| !r.removed[x]).count();
            is_strict_majority(kept, records.len())
        })
        .collect())
}

/// Runs every vote, aggregates, and trains the final detector on the kept set.
pub fn baaf_train<S: Scalar>(
    dataset: &FeatureDataset<S>,
    config: &BaafConfig,
) -> Result<(TrainedDetector<S>, FilterReport<S>)> {
    baaf_train_with(dataset, config, &config.backend)
}

/// [`baaf_train`] with an arbitrary one-class method. `config.backend` is only
/// echoed into the report.
pub fn baaf_train_with<S: Scalar, M: OneClassMethod<S>>(
    dataset: &FeatureDataset<S>,
    config: &BaafConfig,
    method: &M,
) -> Result<(M::Model, FilterReport<S>)> {
    check_dataset(dataset, config)?;
    if config.video.is_some() && dataset.clips().is_none() {
        return Err(param_err!(
            "video post-processing requested for a dataset without clips"
        ));
    }
    let em = EmOptions::default();
    let votes: Vec<VoteRecord<S>> = (0..config.k_votes)
        .map(|k| vote_unchecked(dataset, config, method, k, &em))
        .collect::<Result<_>>()?;
    let mut kept = aggregate_votes(&votes)?;
    let kept_in_votes = (0..dataset.len())
        .map(|x| votes.iter().filter(|v| !v.removed[x]).count() as u32)
        .collect();

    let clips = match &config.video {
        Some(video_cfg) => {
            let removed: Vec<bool> = kept.iter().map(|k| !k).collect();
            let decisions = video::postprocess_clips(dataset, &removed, video_cfg)?;
            kept = video::kept_mask(dataset, &decisions)?;
            Some(decisions)
        }
        None => None,
    };

    let kept_idx: Vec<usize> = (0..dataset.len()).filter(|&x| kept[x]).collect();
    if kept_idx.is_empty() {
        return Err(BaafError::AllRemoved(dataset.len()));
    }
    let seed = final_fit_seed(config.master_seed);
    let model = method.fit(&dataset.subset(&kept_idx)?, seed)?;
    let total_fit_calls = votes.iter().map(|v| v.fit_calls).sum::<usize>() + 1;

    let report = FilterReport {
        format: REPORT_FORMAT.to_string(),
        version: REPORT_VERSION,
        name: config.name(),
        config: config.clone(),
        sample_ids: dataset.ids().to_vec(),
        votes,
        kept_in_votes,
        clips,
        kept: kept_idx.iter().map(|&x| dataset.id(x).to_string()).collect(),
        removed: (0..dataset.len())
            .filter(|&x| !kept[x])
            .map(|x| dataset.id(x).to_string())
            .collect(),
        final_fit_seed: seed,
        total_fit_calls,
        evaluation: None,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::rng;
    use rand_distr::{Distribution, StandardNormal};

    fn record(removed: Vec<bool>) -> VoteRecord<f64> {
        VoteRecord {
            vote_index: 0,
            partition: BagPartition { bags: vec![], seed: 0 },
            bag_of: vec![0; removed.len()],
            thresholds: vec![],
            normalized_predictions: vec![],
            constant_groups: vec![],
            anomalous_votes: vec![0; removed.len()],
            removed,
            fit_calls: 0,
        }
    }

    #[test]
    fn strict_majority_thresholds() {
        // n = 4 bags: 3 judges, removal needs 2.
        assert!(!is_strict_majority(1, 3));
        assert!(is_strict_majority(2, 3));
        // n = 6 bags: 5 judges, removal needs 3.
        assert!(!is_strict_majority(2, 5));
        assert!(is_strict_majority(3, 5));
        // n = 2 bags: a single judge decides.
        assert!(is_strict_majority(1, 1));
    }

    #[test]
    fn aggregation_rules() {
        let one = vec![record(vec![true, false])];
        assert_eq!(aggregate_votes(&one).unwrap(), vec![false, true]);

        let three = vec![record(vec![true]), record(vec![false]), record(vec![true])];
        assert_eq!(aggregate_votes(&three).unwrap(), vec![false]);

        let tie = vec![record(vec![true]), record(vec![false])];
        assert_eq!(aggregate_votes(&tie).unwrap(), vec![false]);

        assert!(aggregate_votes::<f64>(&[]).is_err());
        let ragged = vec![record(vec![true]), record(vec![true, false])];
        assert!(matches!(aggregate_votes(&ragged), Err(BaafError::Internal(_))));
    }

    #[test]
    fn parses_names() {
        assert_eq!(BaafConfig::parse_votes_bags("3/4").unwrap(), (3, 4));
        assert_eq!(BaafConfig::parse_votes_bags("BAAF(1/6)").unwrap(), (1, 6));
        assert!(BaafConfig::parse_votes_bags("4").is_err());
        assert_eq!(BaafConfig::new(3, 4).name(), "BAAF(3/4)");
        assert_eq!(BaafConfig::default().name(), "BAAF(1/4)");
    }

    fn planted(seed: u64) -> FeatureDataset<f64> {
        let mut r = rng(seed);
        let mut rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..8).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect();
        for a in 0..4 {
            let mut v = vec![0.0; 8];
            v[a] = 10.0;
            rows.push(v);
        }
        FeatureDataset::from_rows((0..44).map(|i| format!("s{i}")).collect(), rows).unwrap()
    }

    #[test]
    fn too_small_dataset() {
        let ds = planted(1).subset(&[0, 1, 2, 3, 4, 5, 6]).unwrap();
        assert!(matches!(run_vote(&ds, &BaafConfig::default(), 0), Err(BaafError::Parameter(_))));
    }

    #[test]
    fn vote_record_shape() {
        let ds = planted(2);
        let v = run_vote(&ds, &BaafConfig::default().with_seed(5), 0).unwrap();
        assert_eq!(v.fit_calls, 4);
        assert_eq!(v.thresholds.len(), 4);
        assert!(v.anomalous_votes.iter().all(|&c| c <= 3));
        for j in 0..4 {
            assert_eq!(v.normalized_predictions[j].len(), v.targets_of(j).len());
        }
        for x in 0..ds.len() {
            assert_eq!(v.removed[x], v.anomalous_votes[x] >= 2);
        }
    }

    #[test]
    fn report_json_round_trip() {
        let ds = planted(3);
        let (_, report) = baaf_train(&ds, &BaafConfig::new(2, 4).with_seed(1)).unwrap();
        let json = report.to_json().unwrap();
        let back = FilterReport::<f64>::from_json(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn video_requires_clips() {
        let cfg = BaafConfig {
            video: Some(VideoConfig::default()),
            ..BaafConfig::default()
        };
        assert!(matches!(baaf_train(&planted(4), &cfg), Err(BaafError::Parameter(_))));
    }
}
