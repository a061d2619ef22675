use crate::data::FeatureDataset;
use crate::error::{param_err, Result};
use crate::scalar::Scalar;

use super::linalg::{mean_and_covariance, symmetric_eigen};
use super::PcaParams;

/// Principal subspace scored by reconstruction residual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaDetector<S> {
    pub(crate) dim: usize,
    pub(crate) mean: Vec<S>,
    /// Orthonormal principal directions, one per row.
    pub(crate) basis: Vec<S>,
    pub(crate) train_count: usize,
}

impl<S: Scalar> PcaDetector<S> {
    pub(crate) fn fit(params: &PcaParams, train: &FeatureDataset<S>) -> Result<Self> {
        let kept = params.variance_kept;
        if !(kept > 0.0 && kept < 1.0) {
            return Err(param_err!("variance_kept must lie in (0, 1), got {kept}"));
        }
        let dim = train.dim();
        let (mean, cov) = mean_and_covariance(train.values(), dim);
        let (values, vectors) = symmetric_eigen(&cov, dim);
        let values: Vec<S> = values.into_iter().map(|v| v.max(S::zero())).collect();
        let total: S = values.iter().copied().sum();
        let mut n_components = 0;
        if total > S::zero() {
            let target = S::lit(kept) * total;
            let mut acc = S::zero();
            for v in &values {
                acc += *v;
                n_components += 1;
                if acc >= target {
                    break;
                }
            }
        }
        let basis = vectors.into_iter().take(n_components).flatten().collect();
        Ok(PcaDetector {
            dim,
            mean,
            basis,
            train_count: train.len(),
        })
    }

    pub fn n_components(&self) -> usize {
        self.basis.len() / self.dim
    }

    pub fn basis(&self) -> &[S] {
        &self.basis
    }

    pub(crate) fn score(&self, query: &[S]) -> S {
        let mut residual: Vec<S> = query.iter().zip(&self.mean).map(|(&q, &m)| q - m).collect();
        let centered = residual.clone();
        for dir in self.basis.chunks_exact(self.dim) {
            let coef: S = dir.iter().zip(&centered).map(|(&a, &b)| a * b).sum();
            for (r, &a) in residual.iter_mut().zip(dir) {
                *r -= coef * a;
            }
        }
        residual.iter().map(|&v| v * v).sum::<S>().sqrt()
    }
}
