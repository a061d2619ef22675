//! Corruption sweeps: synthesize, corrupt, filter, and score.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{fit, AnomalyScorer, TrainedDetector};
use crate::data::{EvalLabels, FeatureDataset};
use crate::engine::{baaf_train, final_fit_seed, BaafConfig, FilterEvaluation, FilterReport};
use crate::error::{BaafError, Result};
use crate::partition::derive_seed;
use crate::scalar::Scalar;

use super::corruption::{inject_corruption, CorruptionSpec, Independence, Overlap, RateConvention};
use super::metrics::{auroc, filter_precision_recall};
use super::synth::{synth_generate, SynthConfig};

pub const DEFAULT_RATES: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

/// One (seed, rate) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub config: String,
    pub backend: String,
    pub seed: u64,
    pub p: f64,
    pub i_auroc_filtered: f64,
    pub i_auroc_unfiltered: f64,
    pub i_auroc_clean: f64,
    pub filter_precision: Option<f64>,
    pub filter_recall: Option<f64>,
    pub fit_calls: usize,
    pub n_train: usize,
    pub n_injected: usize,
    pub n_removed: usize,
}

#[derive(Debug, Clone)]
pub struct CellOutcome<S> {
    pub row: MetricsRow,
    pub report: FilterReport<S>,
    pub truth: EvalLabels,
}

/// Attaches filter precision/recall to a report.
pub fn evaluate_report<S: Scalar>(report: &mut FilterReport<S>, truth: &EvalLabels) -> Result<()> {
    let pr = filter_precision_recall(report.removed.iter().map(String::as_str), truth)?;
    report.evaluation = Some(FilterEvaluation {
        true_anomalies: pr.true_anomalies,
        removed: pr.removed,
        removed_anomalies: pr.removed_anomalies,
        precision: pr.precision,
        recall: pr.recall,
    });
    Ok(())
}

fn test_auroc<S: Scalar>(
    detector: &TrainedDetector<S>,
    test: &FeatureDataset<S>,
    labels: &[bool],
) -> Result<f64> {
    let scores = test
        .rows()
        .map(|r| detector.score(r))
        .collect::<Result<Vec<S>>>()?;
    auroc(&scores, labels)
}

/// Runs one cell: synthetic draw, corruption, filtering, and the three
/// test AUROCs (filtered, unfiltered on the corrupted set, clean).
pub fn run_cell<S: Scalar>(
    synth: &SynthConfig,
    baaf: &BaafConfig,
    corruption: &CorruptionSpec,
) -> Result<CellOutcome<S>> {
    let data = synth_generate::<S>(synth)?;
    let pool = data.anomaly_pool()?;
    let corrupted = inject_corruption(&data.train, &pool, corruption)?;

    let test = match corruption.overlap {
        Overlap::Overlapping => data.test.clone(),
        Overlap::NonOverlapping => {
            let used: std::collections::HashSet<&str> =
                corrupted.source_ids.iter().map(String::as_str).collect();
            let keep: Vec<usize> = (0..data.test.len())
                .filter(|&i| !used.contains(data.test.id(i)))
                .collect();
            data.test.subset(&keep)?
        }
    };
    let labels = data.test_labels.in_order(&test)?;

    let (filtered, mut report) = baaf_train(&corrupted.dataset, baaf)?;
    evaluate_report(&mut report, &corrupted.truth)?;
    let seed = final_fit_seed(baaf.master_seed);
    let unfiltered = fit(&baaf.backend, &corrupted.dataset, seed)?;
    let clean = fit(&baaf.backend, &data.train, seed)?;

    let eval = report.evaluation.as_ref().expect("evaluation attached");
    let row = MetricsRow {
        config: baaf.name(),
        backend: baaf.backend.name().to_string(),
        seed: synth.seed,
        p: corruption.rate,
        i_auroc_filtered: test_auroc(&filtered, &test, &labels)?,
        i_auroc_unfiltered: test_auroc(&unfiltered, &test, &labels)?,
        i_auroc_clean: test_auroc(&clean, &test, &labels)?,
        filter_precision: eval.precision,
        filter_recall: eval.recall,
        fit_calls: report.total_fit_calls,
        n_train: corrupted.dataset.len(),
        n_injected: corrupted.injected_count(),
        n_removed: report.removed.len(),
    };
    Ok(CellOutcome {
        row,
        report,
        truth: corrupted.truth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub synth: SynthConfig,
    pub baaf: BaafConfig,
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub convention: RateConvention,
    #[serde(default)]
    pub overlap: Overlap,
    #[serde(default)]
    pub independence: Independence,
}

impl SweepConfig {
    pub fn new(synth: SynthConfig, baaf: BaafConfig) -> Self {
        SweepConfig {
            synth,
            baaf,
            rates: DEFAULT_RATES.to_vec(),
            seeds: vec![0],
            convention: RateConvention::default(),
            overlap: Overlap::default(),
            independence: Independence::default(),
        }
    }

    /// Configuration of one cell. The synthetic draw, corruption and filter
    /// seeds depend only on the sweep seed, so every rate sees the same data.
    pub fn cell(&self, seed: u64, rate: f64) -> (SynthConfig, BaafConfig, CorruptionSpec) {
        let synth = SynthConfig {
            seed,
            ..self.synth.clone()
        };
        let baaf = self
            .baaf
            .clone()
            .with_seed(derive_seed(&[self.baaf.master_seed, seed, 0xBAAF]));
        let corruption = CorruptionSpec {
            rate,
            convention: self.convention,
            overlap: self.overlap,
            independence: self.independence,
            seed: derive_seed(&[seed, 0xC0]),
        };
        (synth, baaf, corruption)
    }
}

/// Runs every (rate, seed) cell, rate-major, in parallel; output order is fixed.
pub fn run_sweep<S: Scalar>(config: &SweepConfig) -> Result<Vec<CellOutcome<S>>> {
    let cells: Vec<(f64, u64)> = config
        .rates
        .iter()
        .flat_map(|&p| config.seeds.iter().map(move |&s| (p, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(p, s)| {
            let (synth, baaf, corruption) = config.cell(s, p);
            run_cell(&synth, &baaf, &corruption)
        })
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("not NaN"));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Per-rate medians over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub p: f64,
    pub seeds: usize,
    pub median_auroc_filtered: f64,
    pub median_auroc_unfiltered: f64,
    pub median_auroc_clean: f64,
    pub median_precision: Option<f64>,
    pub median_recall: Option<f64>,
}

pub fn summarize(rows: &[MetricsRow]) -> Vec<RateSummary> {
    let mut rates: Vec<f64> = Vec::new();
    for r in rows {
        if !rates.contains(&r.p) {
            rates.push(r.p);
        }
    }
    rates
        .into_iter()
        .map(|p| {
            let cell: Vec<&MetricsRow> = rows.iter().filter(|r| r.p == p).collect();
            let col = |f: fn(&MetricsRow) -> f64| median(&cell.iter().map(|r| f(r)).collect::<Vec<_>>());
            let opt = |f: fn(&MetricsRow) -> Option<f64>| {
                median(&cell.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            RateSummary {
                p,
                seeds: cell.len(),
                median_auroc_filtered: col(|r| r.i_auroc_filtered).unwrap_or(f64::NAN),
                median_auroc_unfiltered: col(|r| r.i_auroc_unfiltered).unwrap_or(f64::NAN),
                median_auroc_clean: col(|r| r.i_auroc_clean).unwrap_or(f64::NAN),
                median_precision: opt(|r| r.filter_precision),
                median_recall: opt(|r| r.filter_recall),
            }
        })
        .collect()
}

/// Histogram of one bag's pooled predictions with the fitted weighted
/// component densities evaluated at each bin center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub vote: usize,
    pub bag: usize,
    pub bin_center: f64,
    pub count: usize,
    pub density_nominal: Option<f64>,
    pub density_anomalous: Option<f64>,
    pub threshold: f64,
}

/// Pooled normalized predictions for `bag` in `vote`, as fed to its mixture fit.
pub fn pooled_predictions<S: Scalar>(report: &FilterReport<S>, vote: usize, bag: usize) -> Result<Vec<S>> {
    let v = report
        .votes
        .get(vote)
        .ok_or_else(|| BaafError::Parameter(format!("no vote {vote}")))?;
    let members = v
        .partition
        .bags
        .get(bag)
        .ok_or_else(|| BaafError::Parameter(format!("no bag {bag}")))?;
    let mut out = Vec::new();
    for j in 0..v.n_bags() {
        if j == bag {
            continue;
        }
        let targets = v.targets_of(j);
        for &x in members {
            let pos = targets
                .binary_search(&x)
                .map_err(|_| BaafError::Internal("sample missing from predictions".into()))?;
            out.push(v.normalized_predictions[j][pos]);
        }
    }
    Ok(out)
}

/// Histogram + density rows for every bag of every vote.
pub fn plot_rows<S: Scalar>(report: &FilterReport<S>, bins: usize) -> Result<Vec<PlotRow>> {
    let bins = bins.max(1);
    let mut rows = Vec::new();
    for (vi, vote) in report.votes.iter().enumerate() {
        for t in &vote.thresholds {
            let values = pooled_predictions(report, vi, t.bag)?;
            let mut counts = vec![0usize; bins];
            for v in &values {
                let b = ((v.as_f64() * bins as f64) as usize).min(bins - 1);
                counts[b] += 1;
            }
            for (b, &count) in counts.iter().enumerate() {
                let center = (b as f64 + 0.5) / bins as f64;
                let dens = |c: usize| {
                    t.gmm
                        .as_ref()
                        .map(|g| g.mixture.components[c].weighted_density(S::lit(center)).as_f64())
                };
                rows.push(PlotRow {
                    vote: vi,
                    bag: t.bag,
                    bin_center: center,
                    count,
                    density_nominal: dens(0),
                    density_anomalous: dens(1),
                    threshold: t.threshold.as_f64(),
                });
            }
        }
    }
    Ok(rows)
}

/// Serializes rows with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| BaafError::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| BaafError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| BaafError::Internal(e.to_string()))
}
