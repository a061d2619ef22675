//! One-class anomaly detectors behind a single fit/score contract.
//!
//! The filter only ever calls [`OneClassMethod::fit`] and
//! [`AnomalyScorer::score`]; any detector that implements these two can be
//! wrapped. Three feature-space detectors ship with the crate:
//!
//! * `knn_memory_bank`: stores the training vectors (optionally a greedy
//!   k-center coreset) and scores a query by its distance to the k-th nearest
//!   stored vector.
//! * `gaussian_mahalanobis`: fits a mean and a shrunk covariance
//!   `(1 - λ) Σ + λ tr(Σ)/d I` and scores by Mahalanobis distance.
//! * `pca_reconstruction`: keeps the leading principal directions covering a
//!   fraction of the variance and scores by the norm of the residual.

mod blob;
pub mod coreset;
mod gaussian;
mod knn;
pub(crate) mod linalg;
mod pca;

use serde::{Deserialize, Serialize};

use crate::data::FeatureDataset;
use crate::error::{param_err, Result};
use crate::scalar::Scalar;

pub use blob::BLOB_VERSION;
pub use coreset::{coreset_size, coreset_subsample, farthest_point_indices};
pub use gaussian::{GaussianDetector, VARIANCE_FLOOR};
pub use knn::KnnDetector;
pub use pca::PcaDetector;

/// A trained model that maps a feature vector to a raw anomaly score.
pub trait AnomalyScorer<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of samples the model was trained on.
    fn train_sample_count(&self) -> usize;

    /// Finite, non-negative score; higher is more anomalous.
    fn score(&self, query: &[S]) -> Result<S>;
}

/// Something that trains an [`AnomalyScorer`] on nominal data.
pub trait OneClassMethod<S: Scalar>: Sync {
    type Model: AnomalyScorer<S>;

    fn fit(&self, train: &FeatureDataset<S>, seed: u64) -> Result<Self::Model>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k_neighbors: usize,
    pub coreset_fraction: f64,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k_neighbors: 1,
            coreset_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussianParams {
    pub shrinkage: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        GaussianParams { shrinkage: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcaParams {
    pub variance_kept: f64,
}

impl Default for PcaParams {
    fn default() -> Self {
        PcaParams { variance_kept: 0.95 }
    }
}

/// Which detector to train, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    KnnMemoryBank(KnnParams),
    GaussianMahalanobis(GaussianParams),
    PcaReconstruction(PcaParams),
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::KnnMemoryBank(KnnParams::default())
    }
}

impl BackendConfig {
    pub fn knn() -> Self {
        BackendConfig::KnnMemoryBank(KnnParams::default())
    }

    pub fn gaussian() -> Self {
        BackendConfig::GaussianMahalanobis(GaussianParams::default())
    }

    pub fn pca() -> Self {
        BackendConfig::PcaReconstruction(PcaParams::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            BackendConfig::KnnMemoryBank(_) => "knn_memory_bank",
            BackendConfig::GaussianMahalanobis(_) => "gaussian_mahalanobis",
            BackendConfig::PcaReconstruction(_) => "pca_reconstruction",
        }
    }
}

/// A fitted backend detector. Immutable; scoring is pure and thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedDetector<S> {
    Knn(KnnDetector<S>),
    Gaussian(GaussianDetector<S>),
    Pca(PcaDetector<S>),
}

/// Trains a detector of the configured kind.
pub fn fit<S: Scalar>(
    config: &BackendConfig,
    train: &FeatureDataset<S>,
    seed: u64,
) -> Result<TrainedDetector<S>> {
    if train.is_empty() {
        return Err(param_err!("cannot fit a detector on an empty training set"));
    }
    train.ensure_finite()?;
    Ok(match config {
        BackendConfig::KnnMemoryBank(p) => TrainedDetector::Knn(KnnDetector::fit(p, train, seed)?),
        BackendConfig::GaussianMahalanobis(p) => {
            TrainedDetector::Gaussian(GaussianDetector::fit(p, train)?)
        }
        BackendConfig::PcaReconstruction(p) => TrainedDetector::Pca(PcaDetector::fit(p, train)?),
    })
}

impl<S: Scalar> OneClassMethod<S> for BackendConfig {
    type Model = TrainedDetector<S>;

    fn fit(&self, train: &FeatureDataset<S>, seed: u64) -> Result<Self::Model> {
        fit(self, train, seed)
    }
}

impl<S: Scalar> TrainedDetector<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedDetector::Knn(_) => "knn_memory_bank",
            TrainedDetector::Gaussian(_) => "gaussian_mahalanobis",
            TrainedDetector::Pca(_) => "pca_reconstruction",
        }
    }

    /// Scores every row of a dataset.
    pub fn score_all(&self, data: &FeatureDataset<S>) -> Result<Vec<S>> {
        data.rows().map(|r| self.score(r)).collect()
    }
}

impl<S: Scalar> AnomalyScorer<S> for TrainedDetector<S> {
    fn dim(&self) -> usize {
        match self {
            TrainedDetector::Knn(d) => d.dim,
            TrainedDetector::Gaussian(d) => d.dim,
            TrainedDetector::Pca(d) => d.dim,
        }
    }

    fn train_sample_count(&self) -> usize {
        match self {
            TrainedDetector::Knn(d) => d.train_count,
            TrainedDetector::Gaussian(d) => d.train_count,
            TrainedDetector::Pca(d) => d.train_count,
        }
    }

    fn score(&self, query: &[S]) -> Result<S> {
        if query.len() != self.dim() {
            return Err(param_err!(
                "query has dimension {}, detector expects {}",
                query.len(),
                self.dim()
            ));
        }
        Ok(match self {
            TrainedDetector::Knn(d) => d.score(query),
            TrainedDetector::Gaussian(d) => d.score(query),
            TrainedDetector::Pca(d) => d.score(query),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::rng;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};
    use rayon::prelude::*;

    fn ds(rows: Vec<Vec<f64>>) -> FeatureDataset<f64> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureDataset::from_rows(ids, rows).unwrap()
    }

    fn gaussian_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        (0..n)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect()
    }

    #[test]
    fn knn_full_bank_and_zero_self_score() {
        let train = ds(gaussian_rows(50, 4, 1));
        let det = fit(&BackendConfig::knn(), &train, 0).unwrap();
        match &det {
            TrainedDetector::Knn(k) => assert_eq!(k.bank_rows(), 50),
            _ => unreachable!(),
        }
        for row in train.rows() {
            assert_eq!(det.score(row).unwrap(), 0.0);
        }
    }

    #[test]
    fn knn_two_vector_bank() {
        let det = fit(&BackendConfig::knn(), &ds(vec![vec![0.0, 0.0], vec![1.0, 0.0]]), 0).unwrap();
        assert_eq!(det.score(&[0.25, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn knn_kth_neighbour() {
        let cfg = BackendConfig::KnnMemoryBank(KnnParams {
            k_neighbors: 2,
            coreset_fraction: 1.0,
        });
        let det = fit(&cfg, &ds(vec![vec![0.0], vec![1.0], vec![3.0]]), 0).unwrap();
        assert_eq!(det.score(&[0.0]).unwrap(), 1.0);
        assert_eq!(det.score(&[2.5]).unwrap(), 1.5);
    }

    #[test]
    fn knn_coreset_shrinks_bank() {
        let cfg = BackendConfig::KnnMemoryBank(KnnParams {
            k_neighbors: 1,
            coreset_fraction: 0.25,
        });
        let det = fit(&cfg, &ds(gaussian_rows(40, 3, 2)), 9).unwrap();
        match det {
            TrainedDetector::Knn(k) => assert_eq!(k.bank_rows(), 10),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gaussian_center_scores_zero() {
        let train = ds(gaussian_rows(80, 3, 3));
        let det = fit(&BackendConfig::gaussian(), &train, 0).unwrap();
        let TrainedDetector::Gaussian(g) = &det else { unreachable!() };
        let mu = g.mean().to_vec();
        assert_eq!(det.score(&mu).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_constant_input() {
        let v = vec![1.5, -2.0, 0.25];
        let train = ds(vec![v.clone(); 6]);
        let det = fit(&BackendConfig::gaussian(), &train, 0).unwrap();
        let TrainedDetector::Gaussian(g) = &det else { unreachable!() };
        assert_eq!(g.mean(), v.as_slice());
        assert_eq!(det.score(&v).unwrap(), 0.0);
        assert!(det.score(&[1.5, -2.0, 1.0]).unwrap().is_finite());

        let zero = BackendConfig::GaussianMahalanobis(GaussianParams { shrinkage: 0.0 });
        let many = ds(vec![v.clone(); 10]);
        assert!(matches!(fit(&zero, &many, 0), Err(crate::BaafError::Singular(_))));
        assert!(matches!(fit(&zero, &train.subset(&[0, 1]).unwrap(), 0), Err(crate::BaafError::Parameter(_))));
    }

    #[test]
    fn gaussian_matches_explicit_inverse() {
        // Diagonal covariance: Mahalanobis distance reduces to scaled coordinates.
        let rows = vec![vec![-1.0, -2.0], vec![1.0, 2.0], vec![-1.0, 2.0], vec![1.0, -2.0]];
        let cfg = BackendConfig::GaussianMahalanobis(GaussianParams { shrinkage: 0.0 });
        let det = fit(&cfg, &ds(rows), 0).unwrap();
        let expected = ((3.0f64 / 1.0).powi(2) + (4.0f64 / 2.0).powi(2)).sqrt();
        assert!((det.score(&[3.0, 4.0]).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn pca_residual_is_zero_in_span() {
        let mut r = rng(4);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut r);
                vec![a, 2.0 * a, 0.0]
            })
            .collect();
        let det = fit(&BackendConfig::pca(), &ds(rows), 0).unwrap();
        let TrainedDetector::Pca(p) = &det else { unreachable!() };
        assert_eq!(p.n_components(), 1);
        assert!(det.score(&[1.0, 2.0, 0.0]).unwrap() < 1e-9);
        assert!((det.score(&[0.0, 0.0, 3.0]).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let empty = FeatureDataset::<f64>::new(vec![], 2, vec![]).unwrap();
        assert!(matches!(fit(&BackendConfig::knn(), &empty, 0), Err(crate::BaafError::Parameter(_))));
        let det = fit(&BackendConfig::knn(), &ds(vec![vec![0.0, 0.0]]), 0).unwrap();
        assert!(matches!(det.score(&[0.0]), Err(crate::BaafError::Parameter(_))));
        let bad = BackendConfig::PcaReconstruction(PcaParams { variance_kept: 1.0 });
        assert!(fit(&bad, &ds(vec![vec![0.0]]), 0).is_err());
    }

    #[test]
    fn parallel_scoring_matches_serial() {
        let train = ds(gaussian_rows(64, 5, 6));
        let queries = gaussian_rows(300, 5, 7);
        for cfg in [BackendConfig::knn(), BackendConfig::gaussian(), BackendConfig::pca()] {
            let det = fit(&cfg, &train, 1).unwrap();
            let serial: Vec<u64> = queries.iter().map(|q| det.score(q).unwrap().to_bits()).collect();
            let parallel: Vec<u64> = queries.par_iter().map(|q| det.score(q).unwrap().to_bits()).collect();
            assert_eq!(serial, parallel, "{}", cfg.name());
        }
    }

    #[test]
    fn knn_bank_growth_never_raises_scores() {
        let mut r = rng(8);
        let base = gaussian_rows(20, 3, 9);
        let mut grown = base.clone();
        grown.extend(gaussian_rows(15, 3, 10));
        let small = fit(&BackendConfig::knn(), &ds(base), 0).unwrap();
        let big = fit(&BackendConfig::knn(), &ds(grown), 0).unwrap();
        for _ in 0..200 {
            let q: Vec<f64> = (0..3).map(|_| r.random_range(-4.0..4.0)).collect();
            assert!(big.score(&q).unwrap() <= small.score(&q).unwrap());
        }
    }

    #[test]
    fn knn_scales_and_mahalanobis_is_scale_free() {
        let rows = gaussian_rows(30, 3, 11);
        let c = 3.5;
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        let q = [0.3, -1.2, 2.0];
        let qs: Vec<f64> = q.iter().map(|v| v * c).collect();

        let a = fit(&BackendConfig::knn(), &ds(rows.clone()), 0).unwrap();
        let b = fit(&BackendConfig::knn(), &ds(scaled.clone()), 0).unwrap();
        assert!((b.score(&qs).unwrap() - c * a.score(&q).unwrap()).abs() < 1e-9);

        let g = BackendConfig::GaussianMahalanobis(GaussianParams { shrinkage: 0.0 });
        let a = fit(&g, &ds(rows), 0).unwrap();
        let b = fit(&g, &ds(scaled), 0).unwrap();
        assert!((b.score(&qs).unwrap() - a.score(&q).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn works_in_single_precision() {
        let rows: Vec<Vec<f32>> = gaussian_rows(40, 4, 12)
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as f32).collect())
            .collect();
        let train = FeatureDataset::from_rows((0..40).map(|i| i.to_string()).collect(), rows).unwrap();
        for cfg in [BackendConfig::knn(), BackendConfig::gaussian(), BackendConfig::pca()] {
            let det = fit(&cfg, &train, 0).unwrap();
            let s = det.score(&[5.0, 5.0, 5.0, 5.0]).unwrap();
            assert!(s.is_finite() && s > 0.0, "{}", cfg.name());
        }
    }
}
