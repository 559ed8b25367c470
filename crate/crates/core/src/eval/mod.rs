//! Leave-one-group-out evaluation, metrics and reports.

mod experiment;
mod folds;
mod metrics;
mod report;
mod sweep;

pub use experiment::{
    check_leakage, load_dataset, run_experiment, run_fold, run_on_dataset, EvalReport, ExperimentConfig, FoldOutcome,
    FoldResult, MeanStd, ModelKind, Summary,
};
pub use folds::{groups_requiring_pin, logo_splits, FoldSpec};
pub use metrics::{
    aggregate_confusion, weighted_metrics, AggregateConfusion, ClassMetrics, ConfusionMatrix, WeightedMetrics,
};
pub use report::{
    metrics_csv, read_report, render_confusion, render_report, report_json, write_report, CONFUSION_TXT, METRICS_CSV,
    REPORT_JSON,
};
pub use sweep::{run_sweep, summary_csv, SweepCell, SweepGrid, SUMMARY_CSV};
