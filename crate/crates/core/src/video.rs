//! Clip-level post-processing of per-frame filter decisions.
//!
//! Removed frames are first closed along time (so a kept frame between
//! removed ones is removed too), each clip is then cut at removed frames, and
//! fragments shorter than the minimum length are dropped.

use serde::{Deserialize, Serialize};

use crate::data::FeatureDataset;
use crate::error::{param_err, BaafError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VideoConfig {
    /// Width of the centered structuring element; odd.
    pub closing_window: usize,
    pub min_clip_len: usize,
}

impl Default for VideoConfig {
    fn default() -> Self {
        VideoConfig {
            closing_window: 3,
            min_clip_len: 5,
        }
    }
}

impl VideoConfig {
    pub fn validate(&self) -> Result<()> {
        check_window(self.closing_window)
    }
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(param_err!("closing window must be odd and >= 1, got {window}"));
    }
    Ok(())
}

/// Morphological closing (dilation, then erosion) of a 1-D mask with a
/// centered element of width `window`.
///
/// Computed as the closing on the unbounded line restricted to the mask, so
/// the result always contains the input and closing twice changes nothing.
pub fn close_anomaly_mask(flags: &[bool], window: usize) -> Result<Vec<bool>> {
    check_window(window)?;
    if window > flags.len() {
        return Err(param_err!(
            "closing window {window} exceeds mask length {}",
            flags.len()
        ));
    }
    let r = window / 2;
    let len = flags.len() as isize;
    let r_i = r as isize;
    let dilated = |j: isize| -> bool {
        let lo = (j - r_i).max(0);
        let hi = (j + r_i).min(len - 1);
        lo <= hi && (lo..=hi).any(|k| flags[k as usize])
    };
    Ok((0..len)
        .map(|i| flags[i as usize] || (i - r_i..=i + r_i).all(dilated))
        .collect())
}

/// Maximal runs of kept (`false`) frames with at least `min_len` frames, as
/// inclusive `(start, end)` positions.
pub fn segment_clips(flags: &[bool], min_len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &removed) in flags.iter().chain(std::iter::once(&true)).enumerate() {
        match (removed, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                if i - s >= min_len {
                    out.push((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Post-processed decision for one clip. Positions index the clip's frames in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipDecision {
    pub clip_id: String,
    /// Dataset row of the clip's first frame.
    pub first_row: usize,
    /// Removal flags after closing.
    pub frame_flags: Vec<bool>,
    /// Kept inclusive `(start, end)` intervals.
    pub sub_clips: Vec<(usize, usize)>,
}

impl ClipDecision {
    pub fn kept_frames(&self) -> usize {
        self.sub_clips.iter().map(|(s, e)| e - s + 1).sum()
    }
}

/// Applies closing and segmentation to every clip of `dataset`, given
/// per-sample removal flags in dataset order.
pub fn postprocess_clips<S: Scalar>(
    dataset: &FeatureDataset<S>,
    removed: &[bool],
    config: &VideoConfig,
) -> Result<Vec<ClipDecision>> {
    config.validate()?;
    let clips = dataset
        .clips()
        .ok_or_else(|| param_err!("dataset has no clip structure"))?;
    if removed.len() != dataset.len() {
        return Err(BaafError::Internal(format!(
            "{} flags for {} samples",
            removed.len(),
            dataset.len()
        )));
    }
    clips
        .spans()
        .iter()
        .map(|span| {
            let raw = &removed[span.start..span.start + span.len];
            // Clips shorter than the element are left as they are.
            let closed = if config.closing_window <= raw.len() {
                close_anomaly_mask(raw, config.closing_window)?
            } else {
                raw.to_vec()
            };
            let sub_clips = segment_clips(&closed, config.min_clip_len);
            Ok(ClipDecision {
                clip_id: span.clip_id.clone(),
                first_row: span.start,
                frame_flags: closed,
                sub_clips,
            })
        })
        .collect()
}

/// Per-sample keep flags implied by clip decisions.
pub fn kept_mask<S: Scalar>(dataset: &FeatureDataset<S>, decisions: &[ClipDecision]) -> Result<Vec<bool>> {
    let mut kept = vec![false; dataset.len()];
    for d in decisions {
        for &(s, e) in &d.sub_clips {
            let (a, b) = (d.first_row + s, d.first_row + e);
            if b >= dataset.len() {
                return Err(BaafError::Internal(format!(
                    "clip {:?} decision exceeds dataset",
                    d.clip_id
                )));
            }
            kept[a..=b].iter_mut().for_each(|k| *k = true);
        }
    }
    Ok(kept)
}

/// The kept frames as a new dataset in which every sub-clip is its own clip,
/// named `<clip_id>#<k>`.
pub fn split_into_subclips<S: Scalar>(
    dataset: &FeatureDataset<S>,
    decisions: &[ClipDecision],
) -> Result<FeatureDataset<S>> {
    let clips = dataset
        .clips()
        .ok_or_else(|| param_err!("dataset has no clip structure"))?;
    let mut rows = Vec::new();
    let mut clip_ids = Vec::new();
    let mut frames = Vec::new();
    for d in decisions {
        for (k, &(s, e)) in d.sub_clips.iter().enumerate() {
            for pos in s..=e {
                let row = d.first_row + pos;
                rows.push(row);
                clip_ids.push(format!("{}#{k}", d.clip_id));
                frames.push(clips.frame_of(row));
            }
        }
    }
    let plain = FeatureDataset::new(
        rows.iter().map(|&r| dataset.id(r).to_string()).collect(),
        dataset.dim(),
        rows.iter().flat_map(|&r| dataset.row(r).iter().copied()).collect(),
    )?;
    plain.with_clips(clip_ids, frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn closes_single_hole() {
        assert_eq!(close_anomaly_mask(&mask(&[1, 0, 1]), 3).unwrap(), mask(&[1, 1, 1]));
    }

    #[test]
    fn empty_mask_stays_empty() {
        assert_eq!(close_anomaly_mask(&[false; 7], 3).unwrap(), vec![false; 7]);
    }

    #[test]
    fn wide_gap_is_kept() {
        let m = mask(&[1, 0, 0, 0, 1]);
        assert_eq!(close_anomaly_mask(&m, 3).unwrap(), m);
        // A width-5 element bridges it.
        assert_eq!(close_anomaly_mask(&m, 5).unwrap(), mask(&[1, 1, 1, 1, 1]));
    }

    #[test]
    fn window_errors() {
        assert!(close_anomaly_mask(&[false; 4], 2).is_err());
        assert!(close_anomaly_mask(&[false; 4], 0).is_err());
        assert!(close_anomaly_mask(&[false; 2], 3).is_err());
        assert_eq!(close_anomaly_mask(&mask(&[0, 1, 0]), 1).unwrap(), mask(&[0, 1, 0]));
    }

    #[test]
    fn segmentation_rules() {
        let mut f = vec![false; 12];
        f[5] = true;
        f[6] = true;
        f[7] = true;
        assert_eq!(segment_clips(&f, 5), vec![(0, 4)]);
        assert_eq!(segment_clips(&f, 4), vec![(0, 4), (8, 11)]);
        assert_eq!(segment_clips(&[false; 9], 5), vec![(0, 8)]);
        let alt: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        assert!(segment_clips(&alt, 5).is_empty());
        assert!(segment_clips(&[], 5).is_empty());
    }

    #[test]
    fn dataset_level_postprocess() {
        let n = 24;
        let ds = FeatureDataset::<f64>::new(
            (0..n).map(|i| format!("f{i}")).collect(),
            1,
            (0..n).map(|i| i as f64).collect(),
        )
        .unwrap()
        .with_clips(
            (0..n).map(|i| if i < 12 { "a".into() } else { "b".into() }).collect(),
            (0..n).map(|i| (i % 12) as u64).collect(),
        )
        .unwrap();
        let mut removed = vec![false; n];
        removed[5] = true;
        removed[7] = true; // hole at 6 gets closed
        removed[20] = true;
        let d = postprocess_clips(&ds, &removed, &VideoConfig::default()).unwrap();
        assert_eq!(d[0].sub_clips, vec![(0, 4)]);
        assert!(d[0].frame_flags[6]);
        assert_eq!(d[1].sub_clips, vec![(0, 7)]);
        let kept = kept_mask(&ds, &d).unwrap();
        assert_eq!(kept.iter().filter(|&&k| k).count(), 13);
        let split = split_into_subclips(&ds, &d).unwrap();
        assert_eq!(split.len(), 13);
        assert_eq!(split.clips().unwrap().spans().len(), 2);
        assert_eq!(split.clips().unwrap().spans()[1].clip_id, "b#0");
    }

    proptest! {
        #[test]
        fn closing_properties(flags in proptest::collection::vec(any::<bool>(), 1..40), half in 0usize..4) {
            let w = 2 * half + 1;
            prop_assume!(w <= flags.len());
            let once = close_anomaly_mask(&flags, w).unwrap();
            for (a, b) in flags.iter().zip(&once) {
                prop_assert!(!a || *b);
            }
            prop_assert_eq!(close_anomaly_mask(&once, w).unwrap(), once.clone());
            let kept_before: usize = segment_clips(&flags, 1).iter().map(|(s, e)| e - s + 1).sum();
            let kept_after: usize = segment_clips(&once, 5).iter().map(|(s, e)| e - s + 1).sum();
            prop_assert!(kept_after <= kept_before);
            for (s, e) in segment_clips(&once, 5) {
                prop_assert!(e - s + 1 >= 5);
                prop_assert!(once[s..=e].iter().all(|f| !f));
            }
        }
    }
}
