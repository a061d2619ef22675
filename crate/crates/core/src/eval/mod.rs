//! Synthetic benchmark data, corruption protocols, and evaluation metrics.
//!
//! Ground-truth labels only exist here; the filter never sees them.

pub mod corruption;
pub mod metrics;
pub mod sweep;
pub mod synth;

pub use corruption::{
    inject_corruption, Corrupted, CorruptionSpec, Independence, Overlap, RateConvention,
};
pub use metrics::{auroc, filter_precision_recall, PrecisionRecall};
pub use sweep::{
    evaluate_report, median, plot_rows, pooled_predictions, run_cell, run_sweep, summarize, to_csv,
    CellOutcome, MetricsRow, PlotRow, RateSummary, SweepConfig, DEFAULT_RATES,
};
pub use synth::{synth_generate, SynthConfig, SynthData};
