//! Bootstrap aggregation anomaly filtering.
//!
//! Turns any one-class anomaly detector into one that tolerates anomalies in
//! its training data. The training set is split into disjoint bags, one
//! detector is trained per bag, and each detector scores the samples it did
//! not see. A weighted two-Gaussian fit over those scores sets a per-bag
//! threshold; samples flagged by a majority of detectors are dropped, and the
//! detector is retrained on what remains. Inference is the unmodified
//! detector.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.
//!
//! ```
//! use baaf::{baaf_train, AnomalyScorer, BaafConfig, Dataset};
//!
//! let rows: Vec<Vec<f64>> = (0..40)
//!     .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()])
//!     .chain(std::iter::once(vec![25.0, -30.0]))
//!     .collect();
//! let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
//! let data = Dataset::from_rows(ids, rows).unwrap();
//!
//! let (detector, report) = baaf_train(&data, &BaafConfig::default()).unwrap();
//! assert_eq!(report.total_fit_calls, 5);
//! assert!(report.removed.contains(&"s40".to_string()));
//! assert!(detector.score(&[25.0, -30.0]).unwrap() > 1.0);
//! ```

pub mod backend;
pub mod data;
pub mod engine;
mod error;
pub mod eval;
pub mod gmm;
pub mod partition;
mod scalar;
pub mod video;

pub use backend::{
    coreset_subsample, fit, AnomalyScorer, BackendConfig, GaussianParams, KnnParams,
    OneClassMethod, PcaParams, TrainedDetector,
};
pub use data::{
    load_dataset, write_dataset, EvalLabels, FeatureDataset, Label, LoadedDataset, PayloadFormat,
};
pub use engine::{
    aggregate_votes, baaf_train, baaf_train_with, run_vote, run_vote_with, BaafConfig,
    FilterReport, VoteRecord,
};
pub use error::{BaafError, Result};
pub use gmm::{crossover_threshold, fit_weighted_gmm, normalize_scores, GmmFit, NormalizationMode};
pub use partition::{random_split, BagPartition};
pub use scalar::Scalar;
pub use video::{close_anomaly_mask, segment_clips, ClipDecision, VideoConfig};

pub type Dataset = FeatureDataset<f64>;
pub type Dataset32 = FeatureDataset<f32>;
pub type Detector = TrainedDetector<f64>;
pub type Detector32 = TrainedDetector<f32>;
pub type Gmm = GmmFit<f64>;
pub type Gmm32 = GmmFit<f32>;
pub type Report = FilterReport<f64>;
pub type Report32 = FilterReport<f32>;
pub type Vote = VoteRecord<f64>;
