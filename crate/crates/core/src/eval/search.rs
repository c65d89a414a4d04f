use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kfold::{kfold_split, FoldSplit};
use super::metrics::MetricReport;
use crate::error::{Error, Result};
use crate::kg::{EntityId, ImportanceLabel, KnowledgeGraph};
use crate::models::{predict_scores, train, ModelConfig, NodeFeatureTable};

/// The learning-rate grid searched for every trainable model.
pub const DEFAULT_LR_GRID: [f64; 8] = [0.1, 0.5, 0.01, 0.05, 0.001, 0.005, 0.0001, 0.0005];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub n_train: usize,
    pub test_nodes: Vec<EntityId>,
    pub predictions: Vec<f64>,
    pub truth: Vec<f64>,
    pub metrics: MetricReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrResult {
    pub lr: f64,
    /// Mean test RMSE over folds; absent when any fold failed.
    pub mean_rmse: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// `None` for models without a learning rate.
    pub best_lr: Option<f64>,
    pub per_lr: Vec<LrResult>,
    pub folds: Vec<FoldOutcome>,
}

/// Trains on one fold's training nodes and scores its test nodes.
pub fn evaluate_fold(
    config: &ModelConfig,
    kg: &KnowledgeGraph,
    features: &NodeFeatureTable,
    labels: &HashMap<EntityId, f64>,
    split: &FoldSplit,
    k: usize,
) -> Result<FoldOutcome> {
    let train_labels: Vec<ImportanceLabel> = split
        .train
        .iter()
        .map(|&v| ImportanceLabel { node: v, value: labels[&v] })
        .collect();
    let model = train(config, kg, features, &train_labels)?;
    let pred = predict_scores(&model, kg, features, &split.test)?;
    let truth: Vec<f64> = split.test.iter().map(|v| labels[v]).collect();
    let (metrics, mut warnings) = MetricReport::compute(&pred.scores, &truth, k)?;
    warnings.extend(model.notes);
    warnings.extend(pred.warnings);
    Ok(FoldOutcome {
        fold: split.fold,
        n_train: split.train.len(),
        test_nodes: split.test.clone(),
        predictions: pred.scores,
        truth,
        metrics,
        warnings,
    })
}

/// k-fold cross-validation for each learning rate in `grid`; the rate with
/// the lowest mean test RMSE wins, ties going to the smaller rate.
///
/// All `(lr, fold)` cells are independent and may run in parallel; results
/// are gathered in grid order so the outcome does not depend on scheduling.
pub fn grid_search_lr(
    config: &ModelConfig,
    kg: &KnowledgeGraph,
    features: &NodeFeatureTable,
    labels: &[ImportanceLabel],
    grid: &[f64],
    folds: usize,
    seed: u64,
    k: usize,
) -> Result<SearchOutcome> {
    if grid.is_empty() {
        return Err(Error::Config("learning-rate grid is empty".into()));
    }
    let label_map: HashMap<EntityId, f64> = labels.iter().map(|l| (l.node, l.value)).collect();
    let nodes: Vec<EntityId> = labels.iter().map(|l| l.node).collect();
    let splits = kfold_split(&nodes, folds, seed)?;

    if config.kind.is_topological() {
        let folds = splits
            .iter()
            .map(|s| evaluate_fold(config, kg, features, &label_map, s, k))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SearchOutcome {
            best_lr: None,
            per_lr: Vec::new(),
            folds,
        });
    }

    let cells: Vec<(usize, &FoldSplit)> = (0..grid.len())
        .flat_map(|g| splits.iter().map(move |s| (g, s)))
        .collect();
    let results: Vec<Result<FoldOutcome>> = cells
        .par_iter()
        .map(|&(g, split)| {
            let cfg = ModelConfig {
                learning_rate: grid[g],
                ..config.clone()
            };
            evaluate_fold(&cfg, kg, features, &label_map, split, k)
        })
        .collect();

    let mut per_lr = Vec::with_capacity(grid.len());
    let mut outcomes: Vec<Option<Vec<FoldOutcome>>> = Vec::with_capacity(grid.len());
    let mut it = results.into_iter();
    for &lr in grid {
        let mut fold_results = Vec::with_capacity(splits.len());
        let mut error = None;
        for r in it.by_ref().take(splits.len()) {
            match r {
                Ok(f) => fold_results.push(f),
                Err(e @ (Error::Training(_) | Error::Numeric(_))) => {
                    if error.is_none() {
                        error = Some(e.to_string());
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(e) = &error {
            log::warn!("learning rate {lr} failed: {e}");
            per_lr.push(LrResult { lr, mean_rmse: None, error });
            outcomes.push(None);
        } else {
            let mean = fold_results.iter().map(|f| f.metrics.rmse).sum::<f64>() / fold_results.len() as f64;
            per_lr.push(LrResult { lr, mean_rmse: Some(mean), error: None });
            outcomes.push(Some(fold_results));
        }
    }

    let best = per_lr
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.mean_rmse.map(|m| (i, m, r.lr)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.total_cmp(&b.2)));
    let Some((best_idx, _, best_lr)) = best else {
        let detail: Vec<String> = per_lr
            .iter()
            .map(|r| format!("lr={}: {}", r.lr, r.error.as_deref().unwrap_or("?")))
            .collect();
        return Err(Error::Search(format!("every learning rate failed ({})", detail.join("; "))));
    };
    Ok(SearchOutcome {
        best_lr: Some(best_lr),
        per_lr,
        folds: outcomes.swap_remove(best_idx).expect("best lr has fold results"),
    })
}
