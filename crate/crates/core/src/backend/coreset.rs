//! Greedy k-center (farthest-point) subsampling of a memory bank.

use rand::Rng;

use crate::error::{param_err, Result};
use crate::partition::rng;
use crate::scalar::{squared_distance, Scalar};

/// Number of rows kept for a coreset fraction.
pub fn coreset_size(rows: usize, fraction: f64) -> usize {
    // Guard against products such as (2/3) * 3 landing a hair above an integer.
    let raw = fraction * rows as f64;
    let size = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    size.clamp(1, rows)
}

/// Row indices chosen by farthest-point selection, starting at `first`.
///
/// Each step adds the unchosen row with the largest distance to the chosen
/// set; ties go to the lowest index.
pub fn farthest_point_indices<S: Scalar>(
    bank: &[S],
    dim: usize,
    size: usize,
    first: usize,
) -> Vec<usize> {
    let rows = bank.len() / dim;
    let row = |i: usize| &bank[i * dim..(i + 1) * dim];
    let mut chosen = Vec::with_capacity(size);
    let mut taken = vec![false; rows];
    let mut min_dist = vec![S::infinity(); rows];
    let mut next = first;
    while chosen.len() < size {
        chosen.push(next);
        taken[next] = true;
        let c = row(next);
        let mut best: Option<(usize, S)> = None;
        for i in 0..rows {
            if taken[i] {
                continue;
            }
            let d = squared_distance(row(i), c);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            if best.is_none_or(|(_, b)| min_dist[i] > b) {
                best = Some((i, min_dist[i]));
            }
        }
        match best {
            Some((i, _)) => next = i,
            None => break,
        }
    }
    chosen
}

/// Greedy k-center coreset: `ceil(fraction * rows)` rows, first pick drawn
/// uniformly with `seed`. Returns the selected rows, row-major, in selection order.
pub fn coreset_subsample<S: Scalar>(
    bank: &[S],
    dim: usize,
    fraction: f64,
    seed: u64,
) -> Result<Vec<S>> {
    if dim == 0 || bank.is_empty() {
        return Err(param_err!("coreset of an empty memory bank"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(param_err!("coreset fraction must lie in (0, 1], got {fraction}"));
    }
    let rows = bank.len() / dim;
    let first = rng(seed).random_range(0..rows);
    let picks = farthest_point_indices(bank, dim, coreset_size(rows, fraction), first);
    Ok(picks
        .into_iter()
        .flat_map(|i| bank[i * dim..(i + 1) * dim].iter().copied())
        .collect())
}
