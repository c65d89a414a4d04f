//! Ablation arms, feature assembly and experiment reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::search::{grid_search_lr, FoldOutcome, LrResult, SearchOutcome, DEFAULT_LR_GRID};
use super::metrics::MetricReport;
use crate::embedding::{EmbeddingCache, TextEncoder};
use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::models::{ModelConfig, NodeFeatureTable};
use crate::sampler::SampledContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    NameOnly,
    OriginalDesc,
    Concat,
    AugmentedRandom,
    AugmentedCluster,
}

impl FeatureSource {
    pub const ALL: [FeatureSource; 5] = [
        FeatureSource::NameOnly,
        FeatureSource::OriginalDesc,
        FeatureSource::Concat,
        FeatureSource::AugmentedRandom,
        FeatureSource::AugmentedCluster,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSource::NameOnly => "name_only",
            FeatureSource::OriginalDesc => "original_desc",
            FeatureSource::Concat => "concat",
            FeatureSource::AugmentedRandom => "augmented_random",
            FeatureSource::AugmentedCluster => "augmented_cluster",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

/// Upstream artifacts an arm may draw on.
#[derive(Debug, Default, Clone, Copy)]
pub struct ArmInputs<'a> {
    /// Sampled contexts per node (for `concat`).
    pub contexts: Option<&'a BTreeMap<EntityId, SampledContext>>,
    /// Generated descriptions per node (for the augmented arms).
    pub augmented: Option<&'a BTreeMap<EntityId, String>>,
}

fn description_or_name(kg: &KnowledgeGraph, v: EntityId) -> Result<String> {
    let e = kg.entity(v)?;
    Ok(e.description.clone().unwrap_or_else(|| e.name.clone()))
}

/// The text each node contributes to feature encoding under `arm`.
///
/// Nodes absent from the augmentation map fall back to their original
/// description (or name); the returned count says how many did.
pub fn arm_texts(
    kg: &KnowledgeGraph,
    arm: FeatureSource,
    nodes: &[EntityId],
    inputs: ArmInputs<'_>,
) -> Result<(Vec<String>, usize)> {
    let mut fallbacks = 0;
    let texts = match arm {
        FeatureSource::NameOnly => nodes
            .iter()
            .map(|&v| Ok(kg.entity(v)?.name.clone()))
            .collect::<Result<Vec<_>>>()?,
        FeatureSource::OriginalDesc => nodes
            .iter()
            .map(|&v| description_or_name(kg, v))
            .collect::<Result<Vec<_>>>()?,
        FeatureSource::Concat => {
            let contexts = inputs.contexts.ok_or_else(|| Error::Pipeline {
                stage: "sample".into(),
                message: "the concat arm needs sampled triplet contexts".into(),
            })?;
            nodes
                .iter()
                .map(|&v| {
                    let mut text = description_or_name(kg, v)?;
                    if let Some(ctx) = contexts.get(&v) {
                        for s in &ctx.sentences {
                            text.push(' ');
                            text.push_str(s);
                        }
                    }
                    Ok(text)
                })
                .collect::<Result<Vec<_>>>()?
        }
        FeatureSource::AugmentedRandom | FeatureSource::AugmentedCluster => {
            let generated = inputs.augmented.ok_or_else(|| Error::Pipeline {
                stage: "augment".into(),
                message: format!("the {} arm needs generated descriptions", arm.as_str()),
            })?;
            nodes
                .iter()
                .map(|&v| match generated.get(&v) {
                    Some(t) => Ok(t.clone()),
                    None => {
                        fallbacks += 1;
                        description_or_name(kg, v)
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok((texts, fallbacks))
}

/// Encodes arm texts (through the cache when given) into node features.
pub fn encode_features(
    nodes: Vec<EntityId>,
    texts: &[String],
    encoder: &dyn TextEncoder,
    cache: Option<&mut EmbeddingCache>,
) -> Result<NodeFeatureTable> {
    let emb = match cache {
        Some(c) => c.get_or_encode(encoder, texts)?,
        None => encoder.encode(texts)?,
    };
    NodeFeatureTable::from_embeddings(nodes, &emb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSettings {
    #[serde(default = "d_folds")]
    pub folds: usize,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "d_grid")]
    pub lr_grid: Vec<f64>,
}

fn d_folds() -> usize {
    5
}
fn d_k() -> usize {
    100
}
fn d_grid() -> Vec<f64> {
    DEFAULT_LR_GRID.to_vec()
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            folds: d_folds(),
            k: d_k(),
            lr_grid: d_grid(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: MetricReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub arm: FeatureSource,
    pub model_kind: String,
    pub seed: u64,
    pub config_hash: String,
    /// Every setting that produced this report, including the prompt template.
    pub config: serde_json::Value,
    pub ndcg_gain: String,
    pub lr_grid: Vec<LrResult>,
    pub best_lr: Option<f64>,
    pub folds: Vec<FoldReport>,
    pub aggregate: BTreeMap<String, MeanStd>,
}

impl ExperimentReport {
    pub fn assemble(
        arm: FeatureSource,
        model: &ModelConfig,
        seed: u64,
        config_hash: String,
        config: serde_json::Value,
        search: &SearchOutcome,
    ) -> Self {
        let folds: Vec<FoldReport> = search
            .folds
            .iter()
            .map(|f: &FoldOutcome| FoldReport {
                fold: f.fold,
                n_train: f.n_train,
                n_test: f.test_nodes.len(),
                metrics: f.metrics,
                warnings: f.warnings.clone(),
            })
            .collect();
        let aggregate = MetricReport::NAMES
            .iter()
            .map(|&name| {
                let vals: Vec<f64> = folds.iter().map(|f| f.metrics.get(name).unwrap()).collect();
                (name.to_string(), MeanStd::of(&vals))
            })
            .collect();
        Self {
            arm,
            model_kind: model.kind.as_str().to_string(),
            seed,
            config_hash,
            config,
            ndcg_gain: "linear".to_string(),
            lr_grid: search.per_lr.clone(),
            best_lr: search.best_lr,
            folds,
            aggregate,
        }
    }

    /// Flat CSV: one row per fold per metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("arm,model,seed,fold,metric,value\n");
        for f in &self.folds {
            for name in MetricReport::NAMES {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    self.arm.as_str(),
                    self.model_kind,
                    self.seed,
                    f.fold,
                    name,
                    f.metrics.get(name).unwrap()
                );
            }
        }
        out
    }

    /// File stem embedding arm, model kind and seed.
    pub fn file_stem(&self) -> String {
        format!("report_{}_{}_seed{}", self.arm.as_str(), self.model_kind, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub encode_secs: f64,
    pub search_secs: f64,
}

pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub search: SearchOutcome,
    pub timings: Timings,
    pub text_fallbacks: usize,
}

/// One ablation arm end to end: assemble texts, encode features, run the
/// learning-rate search under k-fold CV and build the report.
#[allow(clippy::too_many_arguments)]
pub fn run_experiment(
    kg: &KnowledgeGraph,
    arm: FeatureSource,
    feature_nodes: &[EntityId],
    inputs: ArmInputs<'_>,
    encoder: &dyn TextEncoder,
    cache: Option<&mut EmbeddingCache>,
    model: &ModelConfig,
    settings: &EvalSettings,
    seed: u64,
    config_hash: String,
    config: serde_json::Value,
) -> Result<ExperimentRun> {
    let labels = kg.labels()?;
    let t0 = Instant::now();
    let (texts, text_fallbacks) = arm_texts(kg, arm, feature_nodes, inputs)?;
    let features = encode_features(feature_nodes.to_vec(), &texts, encoder, cache)?;
    let encode_secs = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let model = ModelConfig { seed, ..model.clone() };
    let search = grid_search_lr(
        &model,
        kg,
        &features,
        &labels,
        &settings.lr_grid,
        settings.folds,
        seed,
        settings.k,
    )?;
    let search_secs = t1.elapsed().as_secs_f64();

    let report = ExperimentReport::assemble(arm, &model, seed, config_hash, config, &search);
    Ok(ExperimentRun {
        report,
        search,
        timings: Timings { encode_secs, search_secs },
        text_fallbacks,
    })
}
