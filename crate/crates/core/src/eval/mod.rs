//! Metrics, k-fold cross-validation, learning-rate search and reports.

mod experiment;
mod kfold;
mod metrics;
mod search;

pub use experiment::{
    arm_texts, encode_features, run_experiment, ArmInputs, EvalSettings, ExperimentReport,
    ExperimentRun, FeatureSource, FoldReport, MeanStd, Timings,
};
pub use kfold::{kfold_split, FoldSplit};
pub use metrics::{
    average_ranks, median_ae, ndcg_at_k, overlap_at_k, rmse, spearman_corr, MetricReport,
};
pub use search::{evaluate_fold, grid_search_lr, FoldOutcome, LrResult, SearchOutcome, DEFAULT_LR_GRID};
