//! Score normalization, weighted two-component 1-D Gaussian mixtures, and the
//! density crossover used as a per-bag anomaly threshold.
//!
//! Every EM sum is weighted by a per-sample weight `w`. With the filter's
//! weights `w = 1 - score` the fit leans towards the low-score (nominal) mass.
//! The threshold is where the two weighted component densities are equal.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, BaafError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// One min-max transform over every prediction of the vote.
    #[default]
    Global,
    /// A separate min-max transform for each trained model's predictions.
    PerModel,
}

/// Min-max normalized prediction groups.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScores<S> {
    pub groups: Vec<Vec<S>>,
    /// Indices of groups whose range was zero (mapped to all zeros).
    pub constant_groups: Vec<usize>,
}

/// Maps values to `[0, 1]` with `(x - min) / (max - min)`; a constant input maps
/// to zeros and reports `true`.
pub fn min_max<S: Scalar>(values: &[S]) -> Result<(Vec<S>, bool)> {
    if values.is_empty() {
        return Err(param_err!("cannot normalize an empty score vector"));
    }
    let (lo, hi) = range(values)?;
    Ok(apply_range(values, lo, hi))
}

fn range<S: Scalar>(values: &[S]) -> Result<(S, S)> {
    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    for &v in values {
        if !v.is_finite() {
            return Err(BaafError::Data(format!("non-finite score {v}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

fn apply_range<S: Scalar>(values: &[S], lo: S, hi: S) -> (Vec<S>, bool) {
    let span = hi - lo;
    if span > S::zero() {
        let out = values
            .iter()
            .map(|&v| ((v - lo) / span).max(S::zero()).min(S::one()))
            .collect();
        (out, false)
    } else {
        (vec![S::zero(); values.len()], true)
    }
}

/// Normalizes groups of raw predictions, jointly (`Global`) or per group (`PerModel`).
pub fn normalize_scores<S: Scalar>(
    groups: &[Vec<S>],
    mode: NormalizationMode,
) -> Result<NormalizedScores<S>> {
    if groups.is_empty() || groups.iter().all(Vec::is_empty) {
        return Err(param_err!("cannot normalize an empty prediction set"));
    }
    let mut constant_groups = Vec::new();
    let out = match mode {
        NormalizationMode::Global => {
            let all: Vec<S> = groups.iter().flatten().copied().collect();
            if all.len() < 2 {
                return Err(param_err!("normalization needs at least 2 values"));
            }
            let (lo, hi) = range(&all)?;
            let mut out = Vec::with_capacity(groups.len());
            for (g, group) in groups.iter().enumerate() {
                let (v, constant) = apply_range(group, lo, hi);
                if constant {
                    constant_groups.push(g);
                }
                out.push(v);
            }
            out
        }
        NormalizationMode::PerModel => {
            let mut out = Vec::with_capacity(groups.len());
            for (g, group) in groups.iter().enumerate() {
                if group.len() < 2 {
                    return Err(param_err!(
                        "normalization group {g} has {} values, need at least 2",
                        group.len()
                    ));
                }
                let (v, constant) = min_max(group)?;
                if constant {
                    constant_groups.push(g);
                }
                out.push(v);
            }
            out
        }
    };
    Ok(NormalizedScores {
        groups: out,
        constant_groups,
    })
}

/// One weighted 1-D Gaussian component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component<S> {
    pub weight: S,
    pub mean: S,
    pub variance: S,
}

impl<S: Scalar> Component<S> {
    pub fn log_density(&self, x: S) -> S {
        let two_pi = S::lit(std::f64::consts::TAU);
        let d = x - self.mean;
        -(S::lit(0.5)) * ((two_pi * self.variance).ln() + d * d / self.variance)
    }

    /// `weight * N(x; mean, variance)`.
    pub fn weighted_density(&self, x: S) -> S {
        (self.weight.ln() + self.log_density(x)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Stop when the weighted log-likelihood improves by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Lower bound on component variances.
    pub variance_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            tolerance: 1e-8,
            max_iterations: 500,
            variance_floor: 1e-6,
        }
    }
}

/// Two-component mixture from weighted EM. Component 0 has the lower mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit<S> {
    pub components: [Component<S>; 2],
    pub converged: bool,
    pub iterations: usize,
    pub final_weighted_loglik: S,
}

/// Mixture plus its crossover threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmFit<S> {
    #[serde(flatten)]
    pub mixture: MixtureFit<S>,
    pub threshold: S,
    /// No crossover inside `(mean_0, mean_1)`; the threshold is an interval endpoint.
    pub threshold_clamped: bool,
}

impl<S: Scalar> GmmFit<S> {
    pub fn nominal(&self) -> &Component<S> {
        &self.mixture.components[0]
    }

    pub fn anomalous(&self) -> &Component<S> {
        &self.mixture.components[1]
    }
}

fn validate_inputs<S: Scalar>(values: &[S], weights: &[S]) -> Result<S> {
    if values.len() != weights.len() {
        return Err(param_err!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        ));
    }
    if values.len() < 4 {
        return Err(param_err!(
            "mixture fit needs at least 4 values, got {}",
            values.len()
        ));
    }
    for (&v, &w) in values.iter().zip(weights) {
        if !v.is_finite() || !w.is_finite() {
            return Err(BaafError::Data("non-finite value or weight".into()));
        }
        if w < S::zero() || w > S::one() {
            return Err(param_err!("weights must lie in [0, 1], got {w}"));
        }
    }
    let total: S = weights.iter().copied().sum();
    if !(total > S::zero()) {
        return Err(param_err!("total weight is zero"));
    }
    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    for (&v, &w) in values.iter().zip(weights) {
        if w > S::zero() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo == hi {
        return Err(BaafError::Degenerate(
            "all weighted values are identical".into(),
        ));
    }
    Ok(total)
}

/// Weighted quantile: the smallest value whose cumulative weight reaches `q * total`.
pub fn weighted_quantile<S: Scalar>(values: &[S], weights: &[S], q: f64) -> S {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let total: S = weights.iter().copied().sum();
    let target = S::lit(q) * total;
    let mut acc = S::zero();
    for &i in &order {
        if weights[i] <= S::zero() {
            continue;
        }
        acc += weights[i];
        if acc >= target {
            return values[i];
        }
    }
    order
        .iter()
        .rev()
        .find(|&&i| weights[i] > S::zero())
        .map(|&i| values[i])
        .unwrap_or_else(S::zero)
}

/// Weighted mean and (population) variance.
pub fn weighted_moments<S: Scalar>(values: &[S], weights: &[S]) -> (S, S) {
    let total: S = weights.iter().copied().sum();
    let mean = values.iter().zip(weights).map(|(&v, &w)| w * v).sum::<S>() / total;
    let var = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| {
            let d = v - mean;
            w * d * d
        })
        .sum::<S>()
        / total;
    (mean, var)
}

fn log_sum_exp<S: Scalar>(a: S, b: S) -> S {
    let m = a.max(b);
    if m == S::neg_infinity() {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Weighted log-likelihood `sum_x w_x log(sum_c pi_c N(v_x; c))`; zero-weight
/// samples contribute nothing.
pub fn weighted_loglik<S: Scalar>(components: &[Component<S>; 2], values: &[S], weights: &[S]) -> S {
    let lw = [components[0].weight.ln(), components[1].weight.ln()];
    values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > S::zero())
        .map(|(&v, &w)| {
            w * log_sum_exp(
                lw[0] + components[0].log_density(v),
                lw[1] + components[1].log_density(v),
            )
        })
        .sum()
}

/// Posterior component probabilities for each value.
pub fn e_step<S: Scalar>(components: &[Component<S>; 2], values: &[S]) -> Vec<[S; 2]> {
    let lw = [components[0].weight.ln(), components[1].weight.ln()];
    values
        .iter()
        .map(|&v| {
            let a = lw[0] + components[0].log_density(v);
            let b = lw[1] + components[1].log_density(v);
            let lse = log_sum_exp(a, b);
            [(a - lse).exp(), (b - lse).exp()]
        })
        .collect()
}

/// Weighted maximization step for fixed responsibilities.
pub fn m_step<S: Scalar>(
    values: &[S],
    weights: &[S],
    responsibilities: &[[S; 2]],
    variance_floor: S,
) -> Result<[Component<S>; 2]> {
    let total: S = weights.iter().copied().sum();
    let mut out = [Component {
        weight: S::zero(),
        mean: S::zero(),
        variance: S::zero(),
    }; 2];
    for (c, comp) in out.iter_mut().enumerate() {
        let mass: S = weights
            .iter()
            .zip(responsibilities)
            .map(|(&w, r)| w * r[c])
            .sum();
        if !(mass > total * S::epsilon()) {
            return Err(BaafError::Degenerate(format!(
                "mixture component {c} lost all of its mass"
            )));
        }
        let mean = values
            .iter()
            .zip(weights)
            .zip(responsibilities)
            .map(|((&v, &w), r)| w * r[c] * v)
            .sum::<S>()
            / mass;
        let var = values
            .iter()
            .zip(weights)
            .zip(responsibilities)
            .map(|((&v, &w), r)| {
                let d = v - mean;
                w * r[c] * d * d
            })
            .sum::<S>()
            / mass;
        *comp = Component {
            weight: mass / total,
            mean,
            variance: var.max(variance_floor),
        };
    }
    Ok(out)
}

/// Deterministic starting point: means at the weighted 25th/75th percentiles,
/// both variances at the weighted global variance, equal mixing weights.
pub fn initial_components<S: Scalar>(values: &[S], weights: &[S], variance_floor: S) -> [Component<S>; 2] {
    let (_, var) = weighted_moments(values, weights);
    let var = var.max(variance_floor);
    let half = S::lit(0.5);
    [
        Component {
            weight: half,
            mean: weighted_quantile(values, weights, 0.25),
            variance: var,
        },
        Component {
            weight: half,
            mean: weighted_quantile(values, weights, 0.75),
            variance: var,
        },
    ]
}

/// Weighted EM for a two-component mixture, returning the fit and the
/// log-likelihood after initialization and after every iteration.
pub fn fit_mixture_traced<S: Scalar>(
    values: &[S],
    weights: &[S],
    options: &EmOptions,
) -> Result<(MixtureFit<S>, Vec<S>)> {
    validate_inputs(values, weights)?;
    let floor = S::lit(options.variance_floor);
    let tol = S::lit(options.tolerance);
    let mut components = initial_components(values, weights, floor);
    let mut ll = weighted_loglik(&components, values, weights);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let resp = e_step(&components, values);
        components = m_step(values, weights, &resp, floor)?;
        let next = weighted_loglik(&components, values, weights);
        history.push(next);
        let gain = next - ll;
        ll = next;
        if gain < tol {
            converged = true;
            break;
        }
    }
    if components[0].mean > components[1].mean {
        components.swap(0, 1);
    }
    Ok((
        MixtureFit {
            components,
            converged,
            iterations,
            final_weighted_loglik: ll,
        },
        history,
    ))
}

pub fn fit_mixture<S: Scalar>(values: &[S], weights: &[S], options: &EmOptions) -> Result<MixtureFit<S>> {
    fit_mixture_traced(values, weights, options).map(|(fit, _)| fit)
}

/// Result of [`crossover_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover<S> {
    pub threshold: S,
    pub clamped: bool,
}

/// Log-density difference `ln(pi_0 N_0(x)) - ln(pi_1 N_1(x))` as `a x^2 + b x + c`.
pub fn log_ratio_coefficients<S: Scalar>(c: &[Component<S>; 2]) -> (S, S, S) {
    let half = S::lit(0.5);
    let (v0, v1) = (c[0].variance, c[1].variance);
    let (m0, m1) = (c[0].mean, c[1].mean);
    let a = half / v1 - half / v0;
    let b = m0 / v0 - m1 / v1;
    let k = half * m1 * m1 / v1 - half * m0 * m0 / v0 + (c[0].weight / c[1].weight).ln()
        + half * (v1 / v0).ln();
    (a, b, k)
}

/// Point between the two means where the weighted densities are equal.
///
/// Solves the quadratic obtained by equating log-densities (linear when the
/// variances match). With two roots inside `(mean_0, mean_1)` the one where
/// the nominal component stops dominating is returned. Without an interior root
/// the nearest interval endpoint is returned and `clamped` is set.
pub fn crossover_threshold<S: Scalar>(components: &[Component<S>; 2]) -> Result<Crossover<S>> {
    let mut c = *components;
    if c[0].mean > c[1].mean {
        c.swap(0, 1);
    }
    let (lo, hi) = (c[0].mean, c[1].mean);
    if (hi - lo).abs() < S::lit(1e-9) {
        return Err(BaafError::Degenerate(
            "component means coincide; no unique crossover".into(),
        ));
    }
    for comp in &c {
        if !(comp.variance > S::zero()) || !(comp.weight > S::zero()) {
            return Err(param_err!("component variance and weight must be positive"));
        }
    }
    let (a, b, k) = log_ratio_coefficients(&c);
    let f = |x: S| (a * x + b) * x + k;

    let mut roots: Vec<S> = Vec::with_capacity(2);
    if a == S::zero() {
        if b != S::zero() {
            roots.push(-k / b);
        }
    } else {
        let disc = b * b - S::lit(4.0) * a * k;
        if disc >= S::zero() {
            let sq = disc.sqrt();
            let q = -(S::lit(0.5)) * (b + b.signum() * sq);
            if q != S::zero() {
                roots.push(q / a);
                roots.push(k / q);
            } else {
                roots.push(-b / (S::lit(2.0) * a));
            }
        }
    }

    let inside: Vec<S> = roots
        .iter()
        .copied()
        .filter(|&r| r > lo && r < hi)
        .collect();
    let clamp01 = |x: S| x.max(S::zero()).min(S::one());
    match inside.as_slice() {
        [t] => Ok(Crossover {
            threshold: clamp01(*t),
            clamped: false,
        }),
        [t0, t1] => {
            let falling = |x: S| S::lit(2.0) * a * x + b < S::zero();
            let t = if falling(*t0) { *t0 } else { *t1 };
            Ok(Crossover {
                threshold: clamp01(t),
                clamped: false,
            })
        }
        _ => {
            let t = if roots.is_empty() {
                if f(lo) > S::zero() {
                    hi
                } else {
                    lo
                }
            } else {
                let dist = |r: S| if r <= lo { lo - r } else { r - hi };
                let nearest = roots
                    .iter()
                    .copied()
                    .min_by(|x, y| dist(*x).partial_cmp(&dist(*y)).unwrap_or(Ordering::Equal))
                    .expect("non-empty roots");
                nearest.max(lo).min(hi)
            };
            Ok(Crossover {
                threshold: clamp01(t),
                clamped: true,
            })
        }
    }
}

/// Weighted EM followed by the crossover threshold, with default options.
pub fn fit_weighted_gmm<S: Scalar>(values: &[S], weights: &[S]) -> Result<GmmFit<S>> {
    fit_weighted_gmm_with(values, weights, &EmOptions::default())
}

pub fn fit_weighted_gmm_with<S: Scalar>(
    values: &[S],
    weights: &[S],
    options: &EmOptions,
) -> Result<GmmFit<S>> {
    let mixture = fit_mixture(values, weights, options)?;
    let crossover = crossover_threshold(&mixture.components)?;
    Ok(GmmFit {
        mixture,
        threshold: crossover.threshold,
        threshold_clamped: crossover.clamped,
    })
}

/// Weighted mean plus three weighted standard deviations; falls back to
/// unweighted moments when every weight is zero.
pub fn fallback_threshold<S: Scalar>(values: &[S], weights: &[S]) -> S {
    let total: S = weights.iter().copied().sum();
    let (mean, var) = if total > S::zero() {
        weighted_moments(values, weights)
    } else {
        let ones = vec![S::one(); values.len()];
        weighted_moments(values, &ones)
    };
    mean + S::lit(3.0) * var.sqrt()
}
