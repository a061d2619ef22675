use std::path::PathBuf;

use baaf::{BaafConfig, BackendConfig, GaussianParams, KnnParams, NormalizationMode, PcaParams, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

fn at_least<const MIN: usize>(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("expected an integer, got {s:?}"))?;
    if v < MIN {
        return Err(format!("must be at least {MIN}"));
    }
    Ok(v)
}

#[derive(Debug, Parser)]
#[command(name = "baaf", version, about = "Bagged anomaly filtering for one-class detectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Generate a labelled synthetic dataset.
    Synth(SynthArgs),
    /// Filter a dataset and train the final detector.
    Filter(FilterArgs),
    /// Run a corruption sweep on synthetic data.
    Eval(EvalArgs),
    /// Re-run a command from its run.json.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    F32le,
    Csv,
}

impl From<Format> for baaf::PayloadFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::F32le => baaf::PayloadFormat::F32le,
            Format::Csv => baaf::PayloadFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Knn,
    Gaussian,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    Global,
    PerModel,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GeneratorArgs {
    /// Feature dimension.
    #[arg(long, default_value_t = 8, value_parser = at_least::<1>)]
    pub dim: usize,
    /// Nominal training samples.
    #[arg(long, default_value_t = 200)]
    pub nominal: usize,
    #[arg(long, default_value_t = 4.0)]
    pub exclusion_radius: f64,
    #[arg(long, default_value_t = 6.0)]
    pub box_half_width: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 50)]
    pub anomaly: usize,
    /// Extra nominal samples drawn from the test stream.
    #[arg(long, default_value_t = 0)]
    pub test_nominal: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::F32le)]
    pub format: Format,
    /// File stem of the dataset.
    #[arg(long, default_value = "synth")]
    pub name: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Filter and detector settings shared by `filter` and `eval`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FilterOptions {
    /// Number of bags n.
    #[arg(long, default_value_t = 4, value_parser = at_least::<2>)]
    pub bags: usize,
    /// Number of votes k.
    #[arg(long, default_value_t = 1, value_parser = at_least::<1>)]
    pub votes: usize,
    /// Votes and bags as "k/n"; overrides --votes and --bags.
    #[arg(long, value_name = "K/N")]
    pub baaf: Option<String>,
    #[arg(long, value_enum, default_value_t = Backend::Knn)]
    pub backend: Backend,
    /// knn: neighbour rank used as the score.
    #[arg(long, default_value_t = 1)]
    pub k_neighbors: usize,
    /// knn: fraction of the memory bank kept by the coreset.
    #[arg(long, default_value_t = 1.0)]
    pub coreset: f64,
    /// gaussian: covariance shrinkage towards a scaled identity.
    #[arg(long, default_value_t = 0.01)]
    pub shrinkage: f64,
    /// pca: fraction of variance kept by the principal subspace.
    #[arg(long, default_value_t = 0.95)]
    pub variance_kept: f64,
    #[arg(long, value_enum, default_value_t = Norm::Global)]
    pub norm: Norm,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl FilterOptions {
    pub fn backend(&self) -> BackendConfig {
        match self.backend {
            Backend::Knn => BackendConfig::KnnMemoryBank(KnnParams {
                k_neighbors: self.k_neighbors,
                coreset_fraction: self.coreset,
            }),
            Backend::Gaussian => BackendConfig::GaussianMahalanobis(GaussianParams {
                shrinkage: self.shrinkage,
            }),
            Backend::Pca => BackendConfig::PcaReconstruction(PcaParams {
                variance_kept: self.variance_kept,
            }),
        }
    }

    pub fn config(&self) -> Result<BaafConfig> {
        let (k, n) = match &self.baaf {
            Some(s) => BaafConfig::parse_votes_bags(s)?,
            None => (self.votes, self.bags),
        };
        let norm = match self.norm {
            Norm::Global => NormalizationMode::Global,
            Norm::PerModel => NormalizationMode::PerModel,
        };
        let cfg = BaafConfig::new(k, n)
            .with_backend(self.backend())
            .with_normalization(norm)
            .with_seed(self.seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FilterArgs {
    /// Dataset manifest (TOML).
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub filter: FilterOptions,
    /// Clip post-processing; needs a dataset with clips.
    #[arg(long)]
    pub video: bool,
    #[arg(long, default_value_t = 3, requires = "video")]
    pub closing_window: usize,
    #[arg(long, default_value_t = 5, requires = "video")]
    pub min_clip_len: usize,
    /// Worker threads; 0 lets the pool decide. Output does not depend on it.
    #[arg(long, env = "BAAF_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value = "baaf-filter")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// p is the anomaly fraction of the corrupted set.
    FractionOfCorrupted,
    /// p is relative to the nominal count.
    FractionOfNominal,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub generator: GeneratorArgs,
    /// Test anomalies; corruption draws from them.
    #[arg(long, default_value_t = 150)]
    pub anomaly: usize,
    #[arg(long, default_value_t = 50)]
    pub test_nominal: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub filter: FilterOptions,
    /// Corruption rates.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4")]
    pub rates: Vec<f64>,
    /// Data seeds; one cell per (rate, seed).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Convention::FractionOfCorrupted)]
    pub convention: Convention,
    /// Drop injected anomalies' sources from the test set.
    #[arg(long)]
    pub non_overlapping: bool,
    /// Inject groups of this many near-duplicates instead of distinct anomalies.
    #[arg(long, value_name = "COPIES")]
    pub duplicates: Option<usize>,
    /// Standard deviation of the duplicate jitter.
    #[arg(long, default_value_t = 0.05)]
    pub jitter: f64,
    /// Histogram bins in the mixture plot data.
    #[arg(long, default_value_t = 20)]
    pub plot_bins: usize,
    #[arg(long, env = "BAAF_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value = "baaf-eval")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// run.json written by an earlier command.
    #[arg(long)]
    pub run: PathBuf,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "BAAF_THREADS")]
    pub threads: Option<usize>,
}
