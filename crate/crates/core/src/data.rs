//! Feature datasets, optional clip structure, and manifest-based file I/O.
//!
//! A dataset on disk is described by a small TOML manifest:
//!
//! ```toml
//! feature_file = "train.f32"
//! rows = 250
//! dim = 8
//! format = "f32le"          # or "csv"
//! labels_file = "train.labels.csv"   # optional, sample_id,label (0 nominal, 1 anomalous)
//! clips_file = "train.clips.csv"     # optional, sample_id,clip_id,frame_index
//! ```
//!
//! `f32le` payloads are `rows * dim` little-endian `f32` values, row-major, with no
//! header; sample ids are the row indices. CSV payloads carry one sample per
//! line with the sample id in the first column. Relative paths resolve against
//! the manifest's directory.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BaafError, Result};
use crate::scalar::Scalar;

/// Ordered collection of fixed-dimension feature vectors with stable ids.
///
/// Carries no labels; ground truth lives in [`EvalLabels`] and only the
/// evaluation code ever sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset<S> {
    ids: Vec<String>,
    dim: usize,
    values: Vec<S>,
    clips: Option<ClipIndex>,
    index: HashMap<String, usize>,
}

/// Per-sample clip assignment for video datasets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipIndex {
    clip_of: Vec<String>,
    frame_of: Vec<u64>,
    spans: Vec<ClipSpan>,
}

/// A contiguous run of samples belonging to one clip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipSpan {
    pub clip_id: String,
    pub start: usize,
    pub len: usize,
}

impl ClipIndex {
    pub fn clip_of(&self, sample: usize) -> &str {
        &self.clip_of[sample]
    }

    pub fn frame_of(&self, sample: usize) -> u64 {
        self.frame_of[sample]
    }

    /// Clips in dataset order.
    pub fn spans(&self) -> &[ClipSpan] {
        &self.spans
    }
}

impl<S: Scalar> FeatureDataset<S> {
    /// Builds a dataset from row-major values.
    pub fn new(ids: Vec<String>, dim: usize, values: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(BaafError::Validation("feature dimension must be >= 1".into()));
        }
        if values.len() != ids.len() * dim {
            return Err(BaafError::Shape(format!(
                "{} values cannot form {} rows of dimension {}",
                values.len(),
                ids.len(),
                dim
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(BaafError::Validation(format!("duplicate sample id {id:?}")));
            }
        }
        Ok(FeatureDataset {
            ids,
            dim,
            values,
            clips: None,
            index,
        })
    }

    /// Builds a dataset from per-sample rows; every row must have the same length.
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<S>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if ids.len() != rows.len() {
            return Err(BaafError::Shape(format!(
                "{} ids for {} rows",
                ids.len(),
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (id, row) in ids.iter().zip(&rows) {
            if row.len() != dim {
                return Err(BaafError::Validation(format!(
                    "sample {id:?} has dimension {} but expected {dim}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(ids, dim, values)
    }

    /// Attaches clip structure. Samples of one clip must be contiguous and
    /// strictly increasing in frame index.
    pub fn with_clips(mut self, clip_of: Vec<String>, frame_of: Vec<u64>) -> Result<Self> {
        if clip_of.len() != self.len() || frame_of.len() != self.len() {
            return Err(BaafError::Validation(format!(
                "clip assignment covers {} samples, dataset has {}",
                clip_of.len().min(frame_of.len()),
                self.len()
            )));
        }
        let mut spans: Vec<ClipSpan> = Vec::new();
        let mut seen = HashSet::new();
        for i in 0..clip_of.len() {
            match spans.last_mut() {
                Some(span) if span.clip_id == clip_of[i] => {
                    if frame_of[i] <= frame_of[i - 1] {
                        return Err(BaafError::Validation(format!(
                            "clip {:?}: frames are not in increasing order at sample {:?}",
                            clip_of[i], self.ids[i]
                        )));
                    }
                    span.len += 1;
                }
                _ => {
                    if !seen.insert(clip_of[i].clone()) {
                        return Err(BaafError::Validation(format!(
                            "clip {:?} is not contiguous",
                            clip_of[i]
                        )));
                    }
                    spans.push(ClipSpan {
                        clip_id: clip_of[i].clone(),
                        start: i,
                        len: 1,
                    });
                }
            }
        }
        self.clips = Some(ClipIndex {
            clip_of,
            frame_of,
            spans,
        });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[S]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Row-major feature values.
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn clips(&self) -> Option<&ClipIndex> {
        self.clips.as_ref()
    }

    /// Copies the given rows, in the given order, into a new dataset. Clip
    /// structure is carried over when present.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut ids = Vec::with_capacity(indices.len());
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(BaafError::Internal(format!("row {i} out of range")));
            }
            ids.push(self.ids[i].clone());
            values.extend_from_slice(self.row(i));
        }
        let out = Self::new(ids, self.dim, values)?;
        match &self.clips {
            Some(c) => out.with_clips(
                indices.iter().map(|&i| c.clip_of[i].clone()).collect(),
                indices.iter().map(|&i| c.frame_of[i]).collect(),
            ),
            None => Ok(out),
        }
    }

    /// Appends the samples of `other`. Clip structure is dropped unless both
    /// sides have it.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(BaafError::Validation(format!(
                "cannot concatenate dimension {} with {}",
                self.dim, other.dim
            )));
        }
        let ids = self.ids.iter().chain(&other.ids).cloned().collect();
        let values = self.values.iter().chain(&other.values).copied().collect();
        let out = Self::new(ids, self.dim, values)?;
        match (&self.clips, &other.clips) {
            (Some(a), Some(b)) => out.with_clips(
                a.clip_of.iter().chain(&b.clip_of).cloned().collect(),
                a.frame_of.iter().chain(&b.frame_of).copied().collect(),
            ),
            _ => Ok(out),
        }
    }

    /// Checks that every value is finite.
    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(BaafError::Data(format!(
                "non-finite feature in sample {:?}",
                self.ids[p / self.dim]
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Nominal,
    Anomalous,
}

impl Label {
    pub fn is_anomalous(self) -> bool {
        self == Label::Anomalous
    }
}

/// Evaluation-only ground truth, keyed by sample id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalLabels(BTreeMap<String, Label>);

impl EvalLabels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, label: Label) -> Option<Label> {
        self.0.insert(id.into(), label)
    }

    pub fn get(&self, id: &str) -> Option<Label> {
        self.0.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Label)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Ids labelled anomalous.
    pub fn anomalous_ids(&self) -> impl Iterator<Item = &str> {
        self.iter().filter(|(_, l)| l.is_anomalous()).map(|(k, _)| k)
    }

    /// Fails unless the labels cover exactly the dataset's sample ids.
    pub fn validate_against<S: Scalar>(&self, dataset: &FeatureDataset<S>) -> Result<()> {
        for id in dataset.ids() {
            if !self.0.contains_key(id) {
                return Err(BaafError::Validation(format!("sample {id:?} has no label")));
            }
        }
        if let Some(extra) = self.0.keys().find(|k| dataset.index_of(k).is_none()) {
            return Err(BaafError::Validation(format!(
                "label given for unknown sample {extra:?}"
            )));
        }
        Ok(())
    }

    /// Labels of the dataset's samples in dataset order.
    pub fn in_order<S: Scalar>(&self, dataset: &FeatureDataset<S>) -> Result<Vec<bool>> {
        dataset
            .ids()
            .iter()
            .map(|id| {
                self.get(id)
                    .map(Label::is_anomalous)
                    .ok_or_else(|| BaafError::Validation(format!("sample {id:?} has no label")))
            })
            .collect()
    }
}

impl FromIterator<(String, Label)> for EvalLabels {
    fn from_iter<T: IntoIterator<Item = (String, Label)>>(iter: T) -> Self {
        EvalLabels(iter.into_iter().collect())
    }
}

/// A dataset as read from disk, with its ground truth kept separate.
#[derive(Debug, Clone)]
pub struct LoadedDataset<S> {
    pub dataset: FeatureDataset<S>,
    pub labels: Option<EvalLabels>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadFormat {
    Csv,
    F32le,
}

/// On-disk dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub feature_file: PathBuf,
    pub rows: usize,
    pub dim: usize,
    pub format: PayloadFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clips_file: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BaafError::io(path, e))?;
        toml::from_str(&text).map_err(|e| BaafError::format(path, e.to_string()))
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| BaafError::format(path, e.to_string()))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| BaafError::format(path, format!("line {}: cannot parse {field:?}", line + 1)))
}

/// Reads a dataset through its manifest.
pub fn load_dataset<S: Scalar>(manifest_path: &Path) -> Result<LoadedDataset<S>> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    if manifest.dim == 0 {
        return Err(BaafError::Validation("manifest declares dim = 0".into()));
    }
    let feature_path = resolve(base, &manifest.feature_file);
    let (ids, values) = match manifest.format {
        PayloadFormat::F32le => read_f32le(&feature_path, manifest.rows, manifest.dim)?,
        PayloadFormat::Csv => read_csv_features(&feature_path, manifest.rows, manifest.dim)?,
    };
    let mut dataset = FeatureDataset::new(ids, manifest.dim, values)?;

    if let Some(clips) = &manifest.clips_file {
        let path = resolve(base, clips);
        let mut assigned: HashMap<String, (String, u64)> = HashMap::new();
        for (line, rec) in csv_reader(&path)?.records().enumerate() {
            let rec = rec.map_err(|e| BaafError::format(&path, e.to_string()))?;
            if rec.len() != 3 {
                return Err(BaafError::format(
                    &path,
                    format!("line {}: expected sample_id,clip_id,frame_index", line + 1),
                ));
            }
            let frame: u64 = parse_field(&path, line, &rec[2])?;
            if dataset.index_of(&rec[0]).is_none() {
                return Err(BaafError::Validation(format!(
                    "clips file references unknown sample {:?}",
                    &rec[0]
                )));
            }
            if assigned
                .insert(rec[0].to_string(), (rec[1].to_string(), frame))
                .is_some()
            {
                return Err(BaafError::Validation(format!(
                    "sample {:?} assigned to a clip twice",
                    &rec[0]
                )));
            }
        }
        let mut clip_of = Vec::with_capacity(dataset.len());
        let mut frame_of = Vec::with_capacity(dataset.len());
        for id in dataset.ids() {
            let (c, f) = assigned
                .remove(id)
                .ok_or_else(|| BaafError::Validation(format!("sample {id:?} has no clip")))?;
            clip_of.push(c);
            frame_of.push(f);
        }
        dataset = dataset.with_clips(clip_of, frame_of)?;
    }

    let labels = match &manifest.labels_file {
        Some(p) => {
            let path = resolve(base, p);
            let labels = read_labels(&path)?;
            labels.validate_against(&dataset)?;
            Some(labels)
        }
        None => None,
    };
    Ok(LoadedDataset { dataset, labels })
}

fn read_f32le<S: Scalar>(path: &Path, rows: usize, dim: usize) -> Result<(Vec<String>, Vec<S>)> {
    let bytes = fs::read(path).map_err(|e| BaafError::io(path, e))?;
    let expected = rows * dim * 4;
    if bytes.len() != expected {
        return Err(BaafError::Shape(format!(
            "{}: expected {expected} bytes for {rows}x{dim} f32, found {}",
            path.display(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| S::from_f32_bits(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Ok(((0..rows).map(|i| i.to_string()).collect(), values))
}

fn read_csv_features<S: Scalar>(
    path: &Path,
    rows: usize,
    dim: usize,
) -> Result<(Vec<String>, Vec<S>)> {
    let mut ids = Vec::with_capacity(rows);
    let mut values = Vec::with_capacity(rows * dim);
    for (line, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| BaafError::format(path, e.to_string()))?;
        if rec.len() != dim + 1 {
            return Err(BaafError::Validation(format!(
                "{}: line {} has {} features, expected {dim}",
                path.display(),
                line + 1,
                rec.len().saturating_sub(1)
            )));
        }
        ids.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            let v: f64 = parse_field(path, line, field)?;
            values.push(S::lit(v));
        }
    }
    if ids.len() != rows {
        return Err(BaafError::Shape(format!(
            "{}: manifest declares {rows} rows, payload has {}",
            path.display(),
            ids.len()
        )));
    }
    Ok((ids, values))
}

fn read_labels(path: &Path) -> Result<EvalLabels> {
    let mut labels = EvalLabels::new();
    for (line, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| BaafError::format(path, e.to_string()))?;
        if rec.len() != 2 {
            return Err(BaafError::format(
                path,
                format!("line {}: expected sample_id,label", line + 1),
            ));
        }
        let label = match &rec[1] {
            "0" => Label::Nominal,
            "1" => Label::Anomalous,
            other => {
                return Err(BaafError::format(
                    path,
                    format!("line {}: label must be 0 or 1, got {other:?}", line + 1),
                ))
            }
        };
        if labels.insert(&rec[0], label).is_some() {
            return Err(BaafError::Validation(format!(
                "duplicate label for sample {:?}",
                &rec[0]
            )));
        }
    }
    Ok(labels)
}

/// Paths produced by [`write_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenDataset {
    pub manifest: PathBuf,
    pub features: PathBuf,
    pub labels: Option<PathBuf>,
    pub clips: Option<PathBuf>,
}

/// Writes `<dir>/<stem>.toml` plus payload, labels and clips files.
///
/// `f32le` stores values as `f32` and uses row indices as ids, so it is exact
/// only for `f32`-representable data whose ids are `0..rows`; CSV round-trips
/// any `f32`/`f64` dataset bit-for-bit.
pub fn write_dataset<S: Scalar>(
    dir: &Path,
    stem: &str,
    dataset: &FeatureDataset<S>,
    labels: Option<&EvalLabels>,
    format: PayloadFormat,
) -> Result<WrittenDataset> {
    fs::create_dir_all(dir).map_err(|e| BaafError::io(dir, e))?;
    let features = match format {
        PayloadFormat::F32le => {
            if let Some((i, id)) = dataset
                .ids()
                .iter()
                .enumerate()
                .find(|(i, id)| **id != i.to_string())
            {
                return Err(BaafError::Validation(format!(
                    "f32le payloads identify samples by row index; row {i} has id {id:?}"
                )));
            }
            let path = dir.join(format!("{stem}.f32"));
            let mut bytes = Vec::with_capacity(dataset.values().len() * 4);
            for v in dataset.values() {
                bytes.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
            }
            fs::write(&path, bytes).map_err(|e| BaafError::io(&path, e))?;
            path
        }
        PayloadFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut w = csv_writer(&path)?;
            for (id, row) in dataset.ids().iter().zip(dataset.rows()) {
                let mut rec = Vec::with_capacity(row.len() + 1);
                rec.push(id.clone());
                rec.extend(row.iter().map(|v| v.to_string()));
                w.write_record(&rec).map_err(|e| BaafError::format(&path, e.to_string()))?;
            }
            w.flush().map_err(|e| BaafError::io(&path, e))?;
            path
        }
    };

    let labels_path = match labels {
        Some(labels) => {
            labels.validate_against(dataset)?;
            let path = dir.join(format!("{stem}.labels.csv"));
            let mut w = csv_writer(&path)?;
            for id in dataset.ids() {
                let l = if labels.get(id) == Some(Label::Anomalous) { "1" } else { "0" };
                w.write_record([id.as_str(), l])
                    .map_err(|e| BaafError::format(&path, e.to_string()))?;
            }
            w.flush().map_err(|e| BaafError::io(&path, e))?;
            Some(path)
        }
        None => None,
    };

    let clips_path = match dataset.clips() {
        Some(clips) => {
            let path = dir.join(format!("{stem}.clips.csv"));
            let mut w = csv_writer(&path)?;
            for (i, id) in dataset.ids().iter().enumerate() {
                w.write_record([id.as_str(), clips.clip_of(i), &clips.frame_of(i).to_string()])
                    .map_err(|e| BaafError::format(&path, e.to_string()))?;
            }
            w.flush().map_err(|e| BaafError::io(&path, e))?;
            Some(path)
        }
        None => None,
    };

    let file_name = |p: &Path| PathBuf::from(p.file_name().expect("written file has a name"));
    let manifest = DatasetManifest {
        feature_file: file_name(&features),
        rows: dataset.len(),
        dim: dataset.dim(),
        format,
        labels_file: labels_path.as_deref().map(file_name),
        clips_file: clips_path.as_deref().map(file_name),
    };
    let manifest_path = dir.join(format!("{stem}.toml"));
    let text = toml::to_string(&manifest).map_err(|e| BaafError::Internal(e.to_string()))?;
    fs::write(&manifest_path, text).map_err(|e| BaafError::io(&manifest_path, e))?;

    Ok(WrittenDataset {
        manifest: manifest_path,
        features,
        labels: labels_path,
        clips: clips_path,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| BaafError::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = FeatureDataset::<f64>::new(vec!["a".into(), "a".into()], 1, vec![0.0, 1.0]);
        assert!(matches!(err, Err(BaafError::Validation(_))));
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = FeatureDataset::<f64>::from_rows(ids(2), vec![vec![0.0, 1.0], vec![2.0]]);
        assert!(matches!(err, Err(BaafError::Validation(_))));
    }

    #[test]
    fn rejects_non_contiguous_clip() {
        let ds = FeatureDataset::<f64>::new(ids(3), 1, vec![0.0, 1.0, 2.0]).unwrap();
        let err = ds.with_clips(vec!["a".into(), "b".into(), "a".into()], vec![0, 0, 1]);
        assert!(matches!(err, Err(BaafError::Validation(_))));
    }

    #[test]
    fn rejects_unordered_frames() {
        let ds = FeatureDataset::<f64>::new(ids(2), 1, vec![0.0, 1.0]).unwrap();
        let err = ds.with_clips(vec!["a".into(), "a".into()], vec![3, 1]);
        assert!(matches!(err, Err(BaafError::Validation(_))));
    }

    #[test]
    fn loads_f32le_without_labels() {
        let dir = tempfile::tempdir().unwrap();
        let values: Vec<f32> = (0..12).map(|v| v as f32 * 0.5).collect();
        let mut bytes = Vec::new();
        for v in &values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(dir.path().join("x.f32"), bytes).unwrap();
        fs::write(
            dir.path().join("m.toml"),
            "feature_file = \"x.f32\"\nrows = 4\ndim = 3\nformat = \"f32le\"\n",
        )
        .unwrap();
        let loaded = load_dataset::<f32>(&dir.path().join("m.toml")).unwrap();
        assert_eq!(loaded.dataset.len(), 4);
        assert_eq!(loaded.dataset.dim(), 3);
        assert!(loaded.labels.is_none());
        assert_eq!(loaded.dataset.values(), values.as_slice());
        assert_eq!(loaded.dataset.id(2), "2");
    }

    #[test]
    fn short_payload_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x.f32"), [0u8; 40]).unwrap();
        fs::write(
            dir.path().join("m.toml"),
            "feature_file = \"x.f32\"\nrows = 4\ndim = 3\nformat = \"f32le\"\n",
        )
        .unwrap();
        let err = load_dataset::<f64>(&dir.path().join("m.toml")).unwrap_err();
        assert!(matches!(err, BaafError::Shape(_)), "{err}");
    }

    #[test]
    fn partial_labels_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x.f32"), [0u8; 48]).unwrap();
        fs::write(dir.path().join("l.csv"), "0,0\n1,0\n2,1\n").unwrap();
        fs::write(
            dir.path().join("m.toml"),
            "feature_file = \"x.f32\"\nrows = 4\ndim = 3\nformat = \"f32le\"\nlabels_file = \"l.csv\"\n",
        )
        .unwrap();
        let err = load_dataset::<f64>(&dir.path().join("m.toml")).unwrap_err();
        assert!(matches!(err, BaafError::Validation(_)), "{err}");
    }

    #[test]
    fn csv_duplicate_id_and_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let m = "feature_file = \"x.csv\"\nrows = 2\ndim = 2\nformat = \"csv\"\n";
        fs::write(dir.path().join("m.toml"), m).unwrap();

        fs::write(dir.path().join("x.csv"), "a,1,2\na,3,4\n").unwrap();
        let err = load_dataset::<f64>(&dir.path().join("m.toml")).unwrap_err();
        assert!(matches!(err, BaafError::Validation(_)), "{err}");

        fs::write(dir.path().join("x.csv"), "a,1,2\nb,3\n").unwrap();
        let err = load_dataset::<f64>(&dir.path().join("m.toml")).unwrap_err();
        assert!(matches!(err, BaafError::Validation(_)), "{err}");

        fs::write(dir.path().join("x.csv"), "a,1,2\n").unwrap();
        let err = load_dataset::<f64>(&dir.path().join("m.toml")).unwrap_err();
        assert!(matches!(err, BaafError::Shape(_)), "{err}");
    }

    #[test]
    fn csv_round_trip_with_clips_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            vec![0.1f64, -3.5e-7],
            vec![1.0 / 3.0, 2.0f64.sqrt()],
            vec![f64::MIN_POSITIVE, 1e300],
        ];
        let names: Vec<String> = vec!["f0".into(), "f1".into(), "g0".into()];
        let ds = FeatureDataset::from_rows(names.clone(), rows)
            .unwrap()
            .with_clips(vec!["c".into(), "c".into(), "d".into()], vec![0, 4, 2])
            .unwrap();
        let labels: EvalLabels = vec![
            ("f0".to_string(), Label::Nominal),
            ("f1".to_string(), Label::Anomalous),
            ("g0".to_string(), Label::Nominal),
        ]
        .into_iter()
        .collect();
        let written = write_dataset(dir.path(), "set", &ds, Some(&labels), PayloadFormat::Csv).unwrap();
        let back = load_dataset::<f64>(&written.manifest).unwrap();
        assert_eq!(back.dataset, ds);
        assert_eq!(back.labels.as_ref(), Some(&labels));
        let bits = |d: &FeatureDataset<f64>| d.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.dataset), bits(&ds));
    }
}
