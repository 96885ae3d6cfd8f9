//! Experiment orchestration: configuration, training runs, comparisons,
//! metrics files, charts and the command-line entry point.

pub mod cli;
mod config;
mod experiment;
mod metrics;
pub mod selftest;
pub mod svg;

pub use config::{ConfigFile, DataSource, DataSpec, ExperimentConfig, OptimizerChoice, Seeds};
pub use experiment::{
    condition_name, format_table, prepare_data, run_comparison, run_experiment, summary_csv,
    ComparisonSummary, ConditionResult, EpochEval, RunOutput, RunSummary,
};
pub use metrics::{
    fmt_sig9, write_metrics_csv, MetricsRecord, MetricsWriter, Split, StepTelemetry, CSV_HEADER,
};
pub use svg::render_summary_svg;
