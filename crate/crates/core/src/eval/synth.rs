//! Synthetic nominal/anomalous feature data.
//!
//! Nominal samples are standard multivariate Gaussian. Anomalies are uniform
//! on the box `[-h, h]^d`, rejected while their Mahalanobis distance to the
//! nominal center is below the exclusion radius, so every anomaly sits
//! outside the nominal ball.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{EvalLabels, FeatureDataset, Label};
use crate::error::{param_err, BaafError, Result};
use crate::partition::{derive_seed, rng};
use crate::scalar::Scalar;

const MAX_REJECTION_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub dim: usize,
    /// Nominal training samples.
    pub n_nominal: usize,
    /// Fresh nominal samples in the test set.
    pub n_test_nominal: usize,
    /// Anomalies in the test set.
    pub n_anomaly: usize,
    pub exclusion_radius: f64,
    pub box_half_width: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            dim: 8,
            n_nominal: 200,
            n_test_nominal: 50,
            n_anomaly: 50,
            exclusion_radius: 4.0,
            box_half_width: 6.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(param_err!("dim must be >= 1"));
        }
        if !(self.exclusion_radius >= 0.0 && self.box_half_width > 0.0) {
            return Err(param_err!("radii must be non-negative and the box non-empty"));
        }
        // The box corner is the farthest point from the center.
        if self.box_half_width * (self.dim as f64).sqrt() <= self.exclusion_radius {
            return Err(param_err!(
                "box of half-width {} in dimension {} lies inside the exclusion radius {}",
                self.box_half_width,
                self.dim,
                self.exclusion_radius
            ));
        }
        Ok(())
    }
}

/// Nominal training data plus a labelled test set.
#[derive(Debug, Clone)]
pub struct SynthData<S> {
    pub train: FeatureDataset<S>,
    /// Test nominals (`t*` ids) followed by anomalies (`a*` ids).
    pub test: FeatureDataset<S>,
    pub test_labels: EvalLabels,
}

impl<S: Scalar> SynthData<S> {
    /// The test anomalies, in order.
    pub fn anomaly_pool(&self) -> Result<FeatureDataset<S>> {
        let idx: Vec<usize> = (0..self.test.len())
            .filter(|&i| self.test_labels.get(self.test.id(i)) == Some(Label::Anomalous))
            .collect();
        self.test.subset(&idx)
    }
}

fn gaussian_rows<S: Scalar>(n: usize, dim: usize, seed: u64) -> Vec<S> {
    let mut r = rng(seed);
    (0..n * dim)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut r);
            S::lit(v)
        })
        .collect()
}

fn anomaly_rows<S: Scalar>(config: &SynthConfig, seed: u64) -> Result<Vec<S>> {
    let mut r = rng(seed);
    let h = config.box_half_width;
    let r2 = config.exclusion_radius * config.exclusion_radius;
    let mut out = Vec::with_capacity(config.n_anomaly * config.dim);
    let mut point = vec![0.0f64; config.dim];
    let mut attempts = 0;
    for _ in 0..config.n_anomaly {
        loop {
            attempts += 1;
            if attempts > MAX_REJECTION_ATTEMPTS {
                return Err(BaafError::Generator(format!(
                    "rejection sampling exceeded {MAX_REJECTION_ATTEMPTS} attempts"
                )));
            }
            point.iter_mut().for_each(|p| *p = r.random_range(-h..=h));
            if point.iter().map(|p| p * p).sum::<f64>() >= r2 {
                break;
            }
        }
        out.extend(point.iter().map(|&p| S::lit(p)));
    }
    Ok(out)
}

/// Draws the training and test sets. Each part has its own random stream, so
/// changing one count leaves the other parts unchanged.
pub fn synth_generate<S: Scalar>(config: &SynthConfig) -> Result<SynthData<S>> {
    config.validate()?;
    let d = config.dim;
    let train = FeatureDataset::new(
        (0..config.n_nominal).map(|i| format!("n{i}")).collect(),
        d,
        gaussian_rows(config.n_nominal, d, derive_seed(&[config.seed, 0])),
    )?;
    let mut values = gaussian_rows::<S>(config.n_test_nominal, d, derive_seed(&[config.seed, 1]));
    values.extend(anomaly_rows::<S>(config, derive_seed(&[config.seed, 2]))?);
    let ids: Vec<String> = (0..config.n_test_nominal)
        .map(|i| format!("t{i}"))
        .chain((0..config.n_anomaly).map(|i| format!("a{i}")))
        .collect();
    let test_labels = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let label = if i < config.n_test_nominal {
                Label::Nominal
            } else {
                Label::Anomalous
            };
            (id.clone(), label)
        })
        .collect();
    let test = FeatureDataset::new(ids, d, values)?;
    Ok(SynthData {
        train,
        test,
        test_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_mean_near_origin() {
        let cfg = SynthConfig {
            dim: 2,
            n_nominal: 100,
            ..Default::default()
        };
        let data = synth_generate::<f64>(&cfg).unwrap();
        assert!(data.train.values().iter().all(|v| v.is_finite()));
        for c in 0..2 {
            let mean: f64 = data.train.rows().map(|r| r[c]).sum::<f64>() / 100.0;
            assert!(mean.abs() < 0.5);
        }
    }

    #[test]
    fn anomalies_outside_ball() {
        for dim in [1, 2, 8] {
            let cfg = SynthConfig {
                dim,
                n_anomaly: 300,
                seed: dim as u64,
                ..Default::default()
            };
            let data = synth_generate::<f64>(&cfg).unwrap();
            let pool = data.anomaly_pool().unwrap();
            assert_eq!(pool.len(), 300);
            for row in pool.rows() {
                assert!(row.iter().map(|v| v * v).sum::<f64>().sqrt() >= 4.0);
                assert!(row.iter().all(|v| v.abs() <= 6.0));
            }
        }
    }

    #[test]
    fn reproducible_and_separate_streams() {
        let cfg = SynthConfig::default();
        let a = synth_generate::<f32>(&cfg).unwrap();
        let b = synth_generate::<f32>(&cfg).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let more = synth_generate::<f32>(&SynthConfig { n_anomaly: 80, ..cfg }).unwrap();
        assert_eq!(more.train, a.train);
        assert_eq!(more.test.row(0), a.test.row(0));
    }

    #[test]
    fn invalid_configs() {
        assert!(synth_generate::<f64>(&SynthConfig { dim: 0, ..Default::default() }).is_err());
        let impossible = SynthConfig {
            dim: 1,
            exclusion_radius: 7.0,
            ..Default::default()
        };
        assert!(synth_generate::<f64>(&impossible).is_err());
    }
}
