use crate::data::FeatureDataset;
use crate::error::{param_err, BaafError, Result};
use crate::scalar::{count, Scalar};

use super::linalg::{cholesky, forward_substitute, mean_and_covariance};
use super::GaussianParams;

/// Added to the covariance diagonal of every Gaussian fit.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Multivariate Gaussian scored by Mahalanobis distance under a shrunk covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDetector<S> {
    pub(crate) dim: usize,
    pub(crate) mean: Vec<S>,
    /// Lower Cholesky factor of the shrunk covariance, row-major.
    pub(crate) chol: Vec<S>,
    pub(crate) train_count: usize,
}

impl<S: Scalar> GaussianDetector<S> {
    pub(crate) fn fit(params: &GaussianParams, train: &FeatureDataset<S>) -> Result<Self> {
        let lambda = params.shrinkage;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(param_err!("shrinkage must lie in [0, 1], got {lambda}"));
        }
        let dim = train.dim();
        if lambda == 0.0 && train.len() <= dim {
            return Err(param_err!(
                "{} samples in dimension {dim} need shrinkage > 0",
                train.len()
            ));
        }
        let (mean, cov) = mean_and_covariance(train.values(), dim);
        let trace: S = (0..dim).map(|i| cov[i * dim + i]).sum();
        if lambda == 0.0 && trace == S::zero() {
            return Err(BaafError::Singular(
                "training samples have zero variance and shrinkage is 0".into(),
            ));
        }
        let lam = S::lit(lambda);
        let target = lam * trace / count::<S>(dim);
        let floor = S::lit(VARIANCE_FLOOR);
        let mut shrunk: Vec<S> = cov.iter().map(|&c| (S::one() - lam) * c).collect();
        for i in 0..dim {
            shrunk[i * dim + i] += target + floor;
        }
        let chol = cholesky(&shrunk, dim).ok_or_else(|| {
            BaafError::Singular("shrunk covariance is not positive definite".into())
        })?;
        Ok(GaussianDetector {
            dim,
            mean,
            chol,
            train_count: train.len(),
        })
    }

    pub fn mean(&self) -> &[S] {
        &self.mean
    }

    pub(crate) fn score(&self, query: &[S]) -> S {
        let mut y: Vec<S> = query.iter().zip(&self.mean).map(|(&q, &m)| q - m).collect();
        forward_substitute(&self.chol, self.dim, &mut y);
        y.iter().map(|&v| v * v).sum::<S>().sqrt()
    }
}
