//! Randomized disjoint bag partitions and seed derivation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::FeatureDataset;
use crate::error::{param_err, Result};
use crate::scalar::Scalar;

/// Mixes a sequence of words into one 64-bit seed (splitmix64 finalizer).
///
/// Stable across platforms and releases; vote and bag seeds are derived from
/// the master seed with this so results never depend on execution order.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Disjoint, exhaustive split of sample indices into `n` bags.
///
/// Each bag lists dataset row indices in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagPartition {
    pub bags: Vec<Vec<usize>>,
    pub seed: u64,
}

impl BagPartition {
    pub fn n_bags(&self) -> usize {
        self.bags.len()
    }

    /// Bag index of every sample, for a dataset of `len` samples.
    pub fn assignment(&self, len: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; len];
        for (b, bag) in self.bags.iter().enumerate() {
            for &i in bag {
                out[i] = b;
            }
        }
        out
    }
}

/// Splits the dataset uniformly at random into `n` bags of near-equal size.
///
/// The unit of assignment is a sample, or a whole clip when the dataset has
/// clip structure; unit counts per bag differ by at most one.
pub fn random_split<S: Scalar>(
    dataset: &FeatureDataset<S>,
    n: usize,
    seed: u64,
) -> Result<BagPartition> {
    if n < 2 {
        return Err(param_err!("need at least 2 bags, got {n}"));
    }
    let units: Vec<Vec<usize>> = match dataset.clips() {
        Some(clips) => clips
            .spans()
            .iter()
            .map(|s| (s.start..s.start + s.len).collect())
            .collect(),
        None => (0..dataset.len()).map(|i| vec![i]).collect(),
    };
    if n > units.len() {
        let what = if dataset.clips().is_some() { "clips" } else { "samples" };
        return Err(param_err!(
            "cannot split {} {what} into {n} non-empty bags",
            units.len()
        ));
    }
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.shuffle(&mut rng(seed));

    let mut bags = vec![Vec::new(); n];
    for (k, &u) in order.iter().enumerate() {
        bags[k % n].extend_from_slice(&units[u]);
    }
    for bag in &mut bags {
        bag.sort_unstable();
    }
    Ok(BagPartition { bags, seed })
}
