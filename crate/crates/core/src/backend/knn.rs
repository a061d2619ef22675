use crate::data::FeatureDataset;
use crate::error::{param_err, Result};
use crate::scalar::{squared_distance, Scalar};

use super::coreset::coreset_subsample;
use super::KnnParams;

/// Memory bank of training vectors scored by k-th nearest neighbour distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnDetector<S> {
    pub(crate) dim: usize,
    pub(crate) k: usize,
    pub(crate) bank: Vec<S>,
    pub(crate) train_count: usize,
}

impl<S: Scalar> KnnDetector<S> {
    pub(crate) fn fit(params: &KnnParams, train: &FeatureDataset<S>, seed: u64) -> Result<Self> {
        if params.k_neighbors == 0 {
            return Err(param_err!("k_neighbors must be >= 1"));
        }
        let bank = if params.coreset_fraction < 1.0 {
            coreset_subsample(train.values(), train.dim(), params.coreset_fraction, seed)?
        } else if params.coreset_fraction == 1.0 {
            train.values().to_vec()
        } else {
            return Err(param_err!(
                "coreset_fraction must lie in (0, 1], got {}",
                params.coreset_fraction
            ));
        };
        Ok(KnnDetector {
            dim: train.dim(),
            k: params.k_neighbors,
            bank,
            train_count: train.len(),
        })
    }

    /// Stored vectors, row-major.
    pub fn memory_bank(&self) -> &[S] {
        &self.bank
    }

    pub fn bank_rows(&self) -> usize {
        self.bank.len() / self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Euclidean distance to the k-th nearest stored vector (the farthest one
    /// when the bank holds fewer than k).
    pub(crate) fn score(&self, query: &[S]) -> S {
        let mut d: Vec<S> = self
            .bank
            .chunks_exact(self.dim)
            .map(|row| squared_distance(row, query))
            .collect();
        let kth = self.k.min(d.len()) - 1;
        let (_, v, _) = d.select_nth_unstable_by(kth, |a, b| a.partial_cmp(b).expect("finite distance"));
        v.sqrt()
    }
}
