//! Sample-level AUROC and filter precision/recall.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::data::EvalLabels;
use crate::error::{param_err, BaafError, Result};
use crate::scalar::Scalar;

/// Probability that a random anomalous sample outscores a random nominal one,
/// ties counted as one half (Mann-Whitney U with mid-ranks).
pub fn auroc<S: Scalar>(scores: &[S], anomalous: &[bool]) -> Result<f64> {
    if scores.len() != anomalous.len() {
        return Err(BaafError::Metric(format!(
            "{} scores for {} labels",
            scores.len(),
            anomalous.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(BaafError::Metric("NaN score".into()));
    }
    let n_pos = anomalous.iter().filter(|&&a| a).count();
    let n_neg = anomalous.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(BaafError::Metric(
            "AUROC needs both nominal and anomalous samples".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    // Sum of (1-based) mid-ranks of the anomalous samples, kept doubled so it stays integral.
    let mut doubled_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let doubled_mid = (i + 1 + j) as u128;
        let pos_in_tie = order[i..j].iter().filter(|&&k| anomalous[k]).count() as u128;
        doubled_rank_sum += doubled_mid * pos_in_tie;
        i = j;
    }
    let np = n_pos as u128;
    let doubled_u = doubled_rank_sum - np * (np + 1);
    Ok(doubled_u as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    /// `None` when nothing was removed or there were no anomalies to find.
    pub precision: Option<f64>,
    /// `None` when there were no anomalies to find.
    pub recall: Option<f64>,
    pub true_anomalies: usize,
    pub removed: usize,
    pub removed_anomalies: usize,
}

/// Precision and recall of a removal set against ground truth covering the
/// filtered training set.
pub fn filter_precision_recall<'a>(
    removed_ids: impl IntoIterator<Item = &'a str>,
    truth: &EvalLabels,
) -> Result<PrecisionRecall> {
    let mut removed = HashSet::new();
    let mut removed_anomalies = 0;
    for id in removed_ids {
        let label = truth
            .get(id)
            .ok_or_else(|| param_err!("removed sample {id:?} is not in the ground truth"))?;
        if removed.insert(id) && label.is_anomalous() {
            removed_anomalies += 1;
        }
    }
    let true_anomalies = truth.anomalous_ids().count();
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(PrecisionRecall {
        precision: if true_anomalies == 0 {
            None
        } else {
            ratio(removed_anomalies, removed.len())
        },
        recall: ratio(removed_anomalies, true_anomalies),
        true_anomalies,
        removed: removed.len(),
        removed_anomalies,
    })
}
