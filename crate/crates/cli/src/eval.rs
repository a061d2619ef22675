use serde::Serialize;

use baaf::engine::ThresholdSource;
use baaf::eval::{
    plot_rows, run_sweep, summarize, to_csv, CellOutcome, Independence, MetricsRow, Overlap,
    RateConvention, RateSummary, SweepConfig,
};
use baaf::{BaafError, Result};

use crate::args::{Command, Convention, EvalArgs};
use crate::manifest::{write_file, RunManifest};
use crate::synth::generator_config;

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const PLOT_CSV: &str = "gmm_plot.csv";
pub const PARAMS_CSV: &str = "gmm_params.csv";

pub fn sweep_config(args: &EvalArgs) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::new(
        generator_config(&args.generator, args.anomaly, args.test_nominal, 0),
        args.filter.config()?,
    );
    cfg.synth.validate()?;
    cfg.rates = args.rates.clone();
    cfg.seeds = args.seeds.clone();
    cfg.convention = match args.convention {
        Convention::FractionOfCorrupted => RateConvention::FractionOfCorrupted,
        Convention::FractionOfNominal => RateConvention::FractionOfNominal,
    };
    if args.non_overlapping {
        cfg.overlap = Overlap::NonOverlapping;
    }
    if let Some(copies) = args.duplicates {
        cfg.independence = Independence::JitteredDuplicates {
            copies,
            jitter: args.jitter,
        };
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    rows: &'a [MetricsRow],
    summary: Vec<RateSummary>,
}

#[derive(Serialize)]
struct PlotLine {
    seed: u64,
    p: f64,
    vote: usize,
    bag: usize,
    bin_center: f64,
    count: usize,
    density_nominal: Option<f64>,
    density_anomalous: Option<f64>,
    threshold: f64,
}

#[derive(Serialize)]
struct ParamLine {
    seed: u64,
    p: f64,
    vote: usize,
    bag: usize,
    source: &'static str,
    threshold: f64,
    threshold_clamped: Option<bool>,
    pi_nominal: Option<f64>,
    mu_nominal: Option<f64>,
    var_nominal: Option<f64>,
    pi_anomalous: Option<f64>,
    mu_anomalous: Option<f64>,
    var_anomalous: Option<f64>,
    converged: Option<bool>,
    iterations: Option<usize>,
}

fn param_lines(cell: &CellOutcome<f64>) -> Vec<ParamLine> {
    let mut out = Vec::new();
    for (vi, vote) in cell.report.votes.iter().enumerate() {
        for t in &vote.thresholds {
            let g = t.gmm.as_ref();
            let comp = |c: usize| g.map(|g| g.mixture.components[c]);
            out.push(ParamLine {
                seed: cell.row.seed,
                p: cell.row.p,
                vote: vi,
                bag: t.bag,
                source: match t.source {
                    ThresholdSource::Crossover => "crossover",
                    ThresholdSource::Fallback => "fallback",
                },
                threshold: t.threshold,
                threshold_clamped: g.map(|g| g.threshold_clamped),
                pi_nominal: comp(0).map(|c| c.weight),
                mu_nominal: comp(0).map(|c| c.mean),
                var_nominal: comp(0).map(|c| c.variance),
                pi_anomalous: comp(1).map(|c| c.weight),
                mu_anomalous: comp(1).map(|c| c.mean),
                var_anomalous: comp(1).map(|c| c.variance),
                converged: g.map(|g| g.mixture.converged),
                iterations: g.map(|g| g.mixture.iterations),
            });
        }
    }
    out
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let config = sweep_config(args)?;
    let out = &args.out;
    let outputs = [METRICS_CSV, METRICS_JSON, PLOT_CSV, PARAMS_CSV]
        .iter()
        .map(|f| out.join(f))
        .collect();
    RunManifest::new(Command::Eval(args.clone()), &config, config.baaf.master_seed, vec![], outputs)?
        .write(out)?;

    let cells = run_sweep::<f64>(&config)?;
    let rows: Vec<MetricsRow> = cells.iter().map(|c| c.row.clone()).collect();
    let mut plot = Vec::new();
    let mut params = Vec::new();
    for cell in &cells {
        for row in plot_rows(&cell.report, args.plot_bins)? {
            plot.push(PlotLine {
                seed: cell.row.seed,
                p: cell.row.p,
                vote: row.vote,
                bag: row.bag,
                bin_center: row.bin_center,
                count: row.count,
                density_nominal: row.density_nominal,
                density_anomalous: row.density_anomalous,
                threshold: row.threshold,
            });
        }
        params.extend(param_lines(cell));
    }
    let summary = summarize(&rows);
    let json = serde_json::to_string_pretty(&MetricsFile {
        rows: &rows,
        summary: summary.clone(),
    })
    .map_err(|e| BaafError::Internal(e.to_string()))?;

    write_file(&out.join(METRICS_CSV), to_csv(&rows)?.as_bytes())?;
    write_file(&out.join(METRICS_JSON), json.as_bytes())?;
    write_file(&out.join(PLOT_CSV), to_csv(&plot)?.as_bytes())?;
    write_file(&out.join(PARAMS_CSV), to_csv(&params)?.as_bytes())?;

    let show = |v: Option<f64>| v.map_or("null".to_string(), |x| format!("{x:.3}"));
    println!("{} on {} seed(s)", config.baaf.name(), config.seeds.len());
    println!("p      filtered  unfiltered  clean   precision  recall");
    for s in &summary {
        println!(
            "{:<6} {:<9.4} {:<11.4} {:<7.4} {:<10} {}",
            s.p,
            s.median_auroc_filtered,
            s.median_auroc_unfiltered,
            s.median_auroc_clean,
            show(s.median_precision),
            show(s.median_recall)
        );
    }
    Ok(())
}
