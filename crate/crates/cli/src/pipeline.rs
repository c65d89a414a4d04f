//! Pipeline stages over files in the output directory.
//!
//! Each stage checks that its inputs exist and were produced by the current
//! config, then skips any output whose sidecar already records the expected
//! hash.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lenie_core::augment::{augment_contexts, prompt_for, AugmentationStore};
use lenie_core::embedding::{read_lenb, write_lenb, EmbeddingCache, EncoderKind, TextEncoder};
use lenie_core::eval::{arm_texts, grid_search_lr, ArmInputs, ExperimentReport, FeatureSource, MeanStd};
use lenie_core::kg::KgSummary;
use lenie_core::models::{predict_scores, train, write_checkpoint, ModelConfig, NodeFeatureTable};
use lenie_core::sampler::{sample_triplets, SampledContext, SamplingStrategy};
use lenie_core::{load_kg, EntityId, KnowledgeGraph};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::artifacts::{config_hash, file_sha256, is_current, report_stem, write_meta, Layout, Meta};
use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Sample,
    Augment,
    Embed,
    Train,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Sample,
        Stage::Augment,
        Stage::Embed,
        Stage::Train,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Sample => "sample",
            Stage::Augment => "augment",
            Stage::Embed => "embed",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

/// What one invocation did.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub ran: Vec<String>,
    pub skipped: Vec<String>,
    /// LLM completions requested.
    pub generations: usize,
    /// Model fits, counting every (learning rate, fold) cell of a search.
    pub trainings: usize,
    pub augment_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub arm: FeatureSource,
    pub model: String,
    pub best_lr: Option<f64>,
    pub metrics: BTreeMap<String, MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
}

/// A prerequisite artifact and the hash it must carry.
struct Requirement {
    stage: Stage,
    path: PathBuf,
    hash: String,
}

pub struct Pipeline {
    cfg: RunConfig,
    arms: Vec<FeatureSource>,
    layout: Layout,
    kg: Option<KnowledgeGraph>,
    dataset_hash: Option<String>,
    encoder: Option<Box<dyn TextEncoder>>,
    pub summary: RunSummary,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_file(path, &text)
}

fn meta(path: &Path, stage: Stage, hash: &str, info: serde_json::Value) -> Result<(), CliError> {
    let m = Meta {
        stage: stage.name().into(),
        config_hash: hash.into(),
        info,
    };
    write_meta(path, &m).map_err(io_err(path))
}

fn strategy_of(arm: FeatureSource) -> Option<SamplingStrategy> {
    match arm {
        FeatureSource::AugmentedRandom => Some(SamplingStrategy::Random),
        FeatureSource::AugmentedCluster => Some(SamplingStrategy::Cluster),
        _ => None,
    }
}

fn read_contexts(path: &Path) -> Result<Vec<SampledContext>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                CliError::Core(lenie_core::Error::Format(format!(
                    "{} line {}: {e}",
                    path.display(),
                    i + 1
                )))
            })
        })
        .collect()
}

impl Pipeline {
    /// `seed` overrides the config's seed; `arm` restricts the run to one arm.
    pub fn new(mut cfg: RunConfig, seed: Option<u64>, arm: Option<FeatureSource>) -> Self {
        if let Some(s) = seed {
            cfg.seed = s;
        }
        let arms = match arm {
            Some(a) => vec![a],
            None => cfg.arms(),
        };
        let layout = Layout::new(&cfg.output_dir(), cfg.seed);
        let summary = RunSummary {
            seed: cfg.seed,
            ..RunSummary::default()
        };
        Self {
            cfg,
            arms,
            layout,
            kg: None,
            dataset_hash: None,
            encoder: None,
            summary,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// Runs one stage, or every stage in order when `stage` is `None`.
    pub fn run(&mut self, stage: Option<Stage>) -> Result<(), CliError> {
        fs::create_dir_all(&self.layout.dir).map_err(io_err(&self.layout.dir))?;
        match stage {
            Some(s) => self.run_stage(s),
            None => {
                for s in Stage::ALL {
                    self.run_stage(s)?;
                }
                Ok(())
            }
        }
    }

    fn run_stage(&mut self, stage: Stage) -> Result<(), CliError> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Sample => self.sample(),
            Stage::Augment => self.augment(),
            Stage::Embed => self.embed(),
            Stage::Train => self.train(),
            Stage::Evaluate => self.evaluate(),
            Stage::Report => self.report(),
        }
    }

    fn mark(&mut self, ran: bool, item: String) {
        if ran {
            log::info!("{item}: done");
            self.summary.ran.push(item);
        } else {
            log::info!("{item}: up to date, skipped");
            self.summary.skipped.push(item);
        }
    }

    fn kg(&mut self) -> Result<&KnowledgeGraph, CliError> {
        if self.kg.is_none() {
            let [e, r, t] = self.cfg.dataset_paths();
            self.kg = Some(load_kg(e, r, t)?);
        }
        Ok(self.kg.as_ref().unwrap())
    }

    fn encoder(&mut self) -> Result<&dyn TextEncoder, CliError> {
        if self.encoder.is_none() {
            self.encoder = Some(self.cfg.encoder.build()?);
        }
        Ok(self.encoder.as_deref().unwrap())
    }

    fn dataset_hash(&mut self) -> Result<String, CliError> {
        if self.dataset_hash.is_none() {
            let files = self
                .cfg
                .dataset_paths()
                .iter()
                .map(|p| file_sha256(p).map_err(io_err(p)))
                .collect::<Result<Vec<_>, _>>()?;
            self.dataset_hash = Some(config_hash(&json!({
                "dataset": self.cfg.dataset.name,
                "files": files,
            })));
        }
        Ok(self.dataset_hash.clone().unwrap())
    }

    fn sample_hash(&mut self, s: SamplingStrategy) -> Result<String, CliError> {
        let encoder = match s {
            SamplingStrategy::Cluster => json!(self.cfg.encoder),
            SamplingStrategy::Random => serde_json::Value::Null,
        };
        Ok(config_hash(&json!({
            "dataset": self.dataset_hash()?,
            "sampler": self.cfg.sampler_config(s),
            "encoder": encoder,
        })))
    }

    fn augment_hash(&mut self, s: SamplingStrategy) -> Result<String, CliError> {
        Ok(config_hash(&json!({
            "sample": self.sample_hash(s)?,
            "prompt": self.cfg.prompt,
            "backend": self.cfg.backend.backend_id(),
            "endpoint": self.cfg.backend.endpoint,
        })))
    }

    fn ingested(&mut self) -> Result<Requirement, CliError> {
        Ok(Requirement {
            stage: Stage::Ingest,
            path: self.layout.kg_summary(),
            hash: self.dataset_hash()?,
        })
    }

    fn upstream(&mut self, arm: FeatureSource) -> Result<Vec<Requirement>, CliError> {
        let mut reqs = vec![self.ingested()?];
        let sampled = match arm {
            FeatureSource::Concat => Some(self.cfg.sampler.strategy),
            a => strategy_of(a),
        };
        if let Some(s) = sampled {
            reqs.push(Requirement {
                stage: Stage::Sample,
                path: self.layout.samples(s),
                hash: self.sample_hash(s)?,
            });
        }
        if let Some(s) = strategy_of(arm) {
            reqs.push(Requirement {
                stage: Stage::Augment,
                path: self.layout.augment(s),
                hash: self.augment_hash(s)?,
            });
        }
        Ok(reqs)
    }

    fn embed_hash(&mut self, arm: FeatureSource) -> Result<String, CliError> {
        let up = self.upstream(arm)?;
        Ok(config_hash(&json!({
            "arm": arm,
            "upstream": up.last().map(|r| r.hash.clone()),
            "encoder": self.cfg.encoder,
        })))
    }

    fn with_embed(&mut self, arm: FeatureSource) -> Result<Vec<Requirement>, CliError> {
        let mut reqs = self.upstream(arm)?;
        reqs.push(Requirement {
            stage: Stage::Embed,
            path: self.layout.embeddings(arm),
            hash: self.embed_hash(arm)?,
        });
        Ok(reqs)
    }

    fn model_config(&self, m: &ModelConfig) -> ModelConfig {
        ModelConfig {
            seed: self.cfg.seed,
            ..m.clone()
        }
    }

    fn train_hash(&mut self, arm: FeatureSource, m: &ModelConfig) -> Result<String, CliError> {
        Ok(config_hash(&json!({
            "embed": self.embed_hash(arm)?,
            "model": self.model_config(m),
        })))
    }

    fn eval_hash(&mut self, arm: FeatureSource, m: &ModelConfig) -> Result<String, CliError> {
        Ok(config_hash(&json!({
            "embed": self.embed_hash(arm)?,
            "model": self.model_config(m),
            "evaluation": self.cfg.evaluation,
            "seed": self.cfg.seed,
        })))
    }

    /// Fails on the earliest stage whose artifact is missing or stale.
    fn require(reqs: &[Requirement]) -> Result<(), CliError> {
        match reqs.iter().filter(|r| !is_current(&r.path, &r.hash)).min_by_key(|r| r.stage) {
            Some(r) => Err(CliError::MissingStage {
                stage: r.stage.name(),
                artifact: r.path.clone(),
            }),
            None => Ok(()),
        }
    }

    /// Checks every selected arm's inputs before any work starts.
    fn preflight(&mut self, through_embed: bool) -> Result<(), CliError> {
        let mut reqs = Vec::new();
        for arm in self.arms.clone() {
            reqs.extend(if through_embed { self.with_embed(arm)? } else { self.upstream(arm)? });
        }
        Self::require(&reqs)
    }

    /// Strategies whose samples the selected arms need, in a fixed order.
    fn strategies(&self) -> Vec<SamplingStrategy> {
        let set: BTreeSet<SamplingStrategy> = self
            .arms
            .iter()
            .filter_map(|&a| match a {
                FeatureSource::Concat => Some(self.cfg.sampler.strategy),
                a => strategy_of(a),
            })
            .collect();
        set.into_iter().collect()
    }

    fn augmented_strategies(&self) -> Vec<SamplingStrategy> {
        let set: BTreeSet<SamplingStrategy> = self.arms.iter().filter_map(|&a| strategy_of(a)).collect();
        set.into_iter().collect()
    }

    fn ingest(&mut self) -> Result<(), CliError> {
        let hash = self.dataset_hash()?;
        let path = self.layout.kg_summary();
        let ran = !is_current(&path, &hash);
        let summary: KgSummary = if ran {
            let s = self.kg()?.summary();
            write_json(&path, &json!({ "config_hash": hash, "summary": s }))?;
            meta(&path, Stage::Ingest, &hash, serde_json::Value::Null)?;
            s
        } else {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(lenie_core::Error::from)?;
            serde_json::from_value(v["summary"].clone()).map_err(lenie_core::Error::from)?
        };
        println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
        self.mark(ran, "ingest".into());
        Ok(())
    }

    fn sample(&mut self) -> Result<(), CliError> {
        for s in self.strategies() {
            Self::require(&[self.ingested()?])?;
            let hash = self.sample_hash(s)?;
            let path = self.layout.samples(s);
            let item = format!("sample {}", s.as_str());
            if is_current(&path, &hash) {
                self.mark(false, item);
                continue;
            }
            let sampler = self.cfg.sampler_config(s);
            self.kg()?;
            self.encoder()?;
            let kg = self.kg.as_ref().unwrap();
            let encoder = self.encoder.as_deref().unwrap();
            let mut out = String::new();
            for v in 0..kg.num_entities() {
                let ctx = sample_triplets(kg, v, encoder, &sampler)?;
                out.push_str(&serde_json::to_string(&ctx).expect("context serializes"));
                out.push('\n');
            }
            write_file(&path, &out)?;
            meta(&path, Stage::Sample, &hash, json!({ "nodes": kg.num_entities() }))?;
            self.mark(true, item);
        }
        Ok(())
    }

    fn augment(&mut self) -> Result<(), CliError> {
        let mut failures = 0;
        for s in self.augmented_strategies() {
            let arm = match s {
                SamplingStrategy::Random => FeatureSource::AugmentedRandom,
                SamplingStrategy::Cluster => FeatureSource::AugmentedCluster,
            };
            let mut reqs = self.upstream(arm)?;
            let target = reqs.pop().expect("augment requirement");
            Self::require(&reqs)?;
            let item = format!("augment {}", s.as_str());
            if is_current(&target.path, &target.hash) {
                self.mark(false, item);
                continue;
            }
            let contexts = read_contexts(&self.layout.samples(s))?;
            let backend = self.cfg.backend.build()?;
            let mut store = AugmentationStore::open(&target.path)?;
            self.kg()?;
            let kg = self.kg.as_ref().unwrap();
            let outcome = augment_contexts(
                kg,
                &contexts,
                &self.cfg.prompt,
                backend.as_ref(),
                self.cfg.backend.max_inflight,
                &mut store,
            )?;
            self.summary.generations += outcome.generated + outcome.fallbacks + outcome.failures.len();
            log::info!(
                "{item}: {} generated, {} reused, {} empty completions replaced, {} failed",
                outcome.generated,
                outcome.skipped,
                outcome.fallbacks,
                outcome.failures.len()
            );
            if outcome.failures.is_empty() {
                meta(
                    &target.path,
                    Stage::Augment,
                    &target.hash,
                    json!({ "backend": backend.backend_id(), "fallbacks": outcome.fallbacks }),
                )?;
                self.mark(true, item);
            } else {
                failures += outcome.failures.len();
            }
        }
        self.summary.augment_failures += failures;
        if failures > 0 {
            return Err(CliError::PartialAugmentation { failures });
        }
        Ok(())
    }

    /// Generated text per node for the contexts in `samples`, as stored.
    fn generated_texts(&mut self, s: SamplingStrategy) -> Result<BTreeMap<EntityId, String>, CliError> {
        let contexts = read_contexts(&self.layout.samples(s))?;
        let store = AugmentationStore::open(self.layout.augment(s))?;
        let backend_id = self.cfg.backend.backend_id();
        self.kg()?;
        let kg = self.kg.as_ref().unwrap();
        let mut out = BTreeMap::new();
        for ctx in &contexts {
            let p = prompt_for(kg, &self.cfg.prompt, ctx)?;
            if let Some(t) = store.lookup(ctx.node, &p.prompt_hash, &backend_id) {
                out.insert(ctx.node, t.to_string());
            }
        }
        Ok(out)
    }

    fn embed(&mut self) -> Result<(), CliError> {
        self.preflight(false)?;
        for arm in self.arms.clone() {
            let mut reqs = self.with_embed(arm)?;
            let target = reqs.pop().expect("embed requirement");
            Self::require(&reqs)?;
            let item = format!("embed {}", arm.as_str());
            if is_current(&target.path, &target.hash) {
                self.mark(false, item);
                continue;
            }
            let contexts = match arm {
                FeatureSource::Concat => Some(
                    read_contexts(&self.layout.samples(self.cfg.sampler.strategy))?
                        .into_iter()
                        .map(|c| (c.node, c))
                        .collect::<BTreeMap<_, _>>(),
                ),
                _ => None,
            };
            let augmented = match strategy_of(arm) {
                Some(s) => Some(self.generated_texts(s)?),
                None => None,
            };
            let nodes: Vec<EntityId> = (0..self.kg()?.num_entities()).collect();
            let inputs = ArmInputs {
                contexts: contexts.as_ref(),
                augmented: augmented.as_ref(),
            };
            let (texts, fallbacks) = arm_texts(self.kg.as_ref().unwrap(), arm, &nodes, inputs)?;
            self.encoder()?;
            let encoder = self.encoder.as_deref().unwrap();
            let emb = if self.cfg.encoder.kind == EncoderKind::Remote {
                EmbeddingCache::open(self.layout.embedding_cache())?.get_or_encode(encoder, &texts)?
            } else {
                encoder.encode(&texts)?
            };
            write_lenb(&target.path, &emb)?;
            meta(
                &target.path,
                Stage::Embed,
                &target.hash,
                json!({
                    "rows": emb.rows(),
                    "dim": emb.dim(),
                    "row_order": "entity id",
                    "encoder": encoder.encoder_id(),
                    "text_fallbacks": fallbacks,
                }),
            )?;
            self.mark(true, item);
        }
        Ok(())
    }

    fn features(&mut self, arm: FeatureSource) -> Result<NodeFeatureTable, CliError> {
        let emb = read_lenb(self.layout.embeddings(arm))?;
        let n = self.kg()?.num_entities();
        if emb.rows() != n {
            return Err(CliError::Core(lenie_core::Error::Contract(format!(
                "embeddings for {} have {} rows for {n} entities; rerun `lenie embed`",
                arm.as_str(),
                emb.rows()
            ))));
        }
        Ok(NodeFeatureTable::from_embeddings((0..n).collect(), &emb)?)
    }

    fn train(&mut self) -> Result<(), CliError> {
        self.preflight(true)?;
        for arm in self.arms.clone() {
            for m in self.cfg.models.clone() {
                Self::require(&self.with_embed(arm)?)?;
                let hash = self.train_hash(arm, &m)?;
                let ckpt = self.layout.checkpoint(arm, m.kind);
                let preds = self.layout.predictions(arm, m.kind);
                let item = format!("train {} {}", arm.as_str(), m.kind.as_str());
                if is_current(&ckpt, &hash) && is_current(&preds, &hash) {
                    self.mark(false, item);
                    continue;
                }
                let features = self.features(arm)?;
                let model_cfg = self.model_config(&m);
                let kg = self.kg.as_ref().unwrap();
                let labels = kg.labels()?;
                let model = train(&model_cfg, kg, &features, &labels)?;
                self.summary.trainings += 1;
                let nodes: Vec<EntityId> = (0..kg.num_entities()).collect();
                let pred = predict_scores(&model, kg, &features, &nodes)?;
                for w in model.notes.iter().chain(&pred.warnings) {
                    log::warn!("{item}: {w}");
                }
                write_checkpoint(&ckpt, &model)?;
                let mut tsv = String::new();
                for (v, s) in pred.nodes.iter().zip(&pred.scores) {
                    let _ = writeln!(tsv, "{v}\t{s}");
                }
                write_file(&preds, &tsv)?;
                let info = json!({ "learning_rate": model_cfg.learning_rate, "final_loss": model.loss_trace.last() });
                meta(&ckpt, Stage::Train, &hash, info.clone())?;
                meta(&preds, Stage::Train, &hash, info)?;
                self.mark(true, item);
            }
        }
        Ok(())
    }

    fn evaluate(&mut self) -> Result<(), CliError> {
        self.preflight(true)?;
        for arm in self.arms.clone() {
            for m in self.cfg.models.clone() {
                Self::require(&self.with_embed(arm)?)?;
                let hash = self.eval_hash(arm, &m)?;
                let stem = report_stem(arm, m.kind, self.cfg.seed);
                let json_path = self.layout.report_json(&stem);
                let item = format!("evaluate {} {}", arm.as_str(), m.kind.as_str());
                if is_current(&json_path, &hash) {
                    self.mark(false, item);
                    continue;
                }
                let features = self.features(arm)?;
                let model_cfg = self.model_config(&m);
                let ev = self.cfg.evaluation.clone();
                let echo = self.cfg.echo();
                let kg = self.kg.as_ref().unwrap();
                let labels = kg.labels()?;
                let t0 = Instant::now();
                let search = grid_search_lr(&model_cfg, kg, &features, &labels, &ev.lr_grid, ev.folds, self.cfg.seed, ev.k)?;
                let search_secs = t0.elapsed().as_secs_f64();
                self.summary.trainings += if m.kind.is_topological() {
                    ev.folds
                } else {
                    ev.folds * ev.lr_grid.len()
                };
                for r in search.per_lr.iter().filter(|r| r.error.is_some()) {
                    log::warn!("{item}: lr {} failed: {}", r.lr, r.error.as_deref().unwrap_or(""));
                }
                let report = ExperimentReport::assemble(arm, &model_cfg, self.cfg.seed, hash.clone(), echo, &search);
                let csv_path = self.layout.report_csv(&stem);
                let timings_path = self.layout.report_timings(&stem);
                write_json(&json_path, &report)?;
                write_file(&csv_path, &report.to_csv())?;
                write_json(&timings_path, &json!({ "config_hash": hash, "search_secs": search_secs }))?;
                for p in [&json_path, &csv_path, &timings_path] {
                    meta(p, Stage::Evaluate, &hash, serde_json::Value::Null)?;
                }
                self.mark(true, item);
            }
        }
        Ok(())
    }

    fn report(&mut self) -> Result<(), CliError> {
        let mut hashes = Vec::new();
        let mut paths = Vec::new();
        let mut all = Vec::new();
        for arm in self.arms.clone() {
            for m in self.cfg.models.clone() {
                let mut reqs = self.with_embed(arm)?;
                let stem = report_stem(arm, m.kind, self.cfg.seed);
                let hash = self.eval_hash(arm, &m)?;
                reqs.push(Requirement {
                    stage: Stage::Evaluate,
                    path: self.layout.report_json(&stem),
                    hash: hash.clone(),
                });
                all.extend(reqs);
                hashes.push(hash);
                paths.push(self.layout.report_json(&stem));
            }
        }
        Self::require(&all)?;
        let hash = config_hash(&json!(hashes));
        let json_path = self.layout.summary_json();
        if is_current(&json_path, &hash) {
            self.mark(false, "report".into());
            return Ok(());
        }
        let mut rows = Vec::new();
        for p in &paths {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            let r: ExperimentReport = serde_json::from_str(&text).map_err(lenie_core::Error::from)?;
            rows.push(SummaryRow {
                arm: r.arm,
                model: r.model_kind,
                best_lr: r.best_lr,
                metrics: r.aggregate,
            });
        }
        let mut csv = String::from("arm,model,best_lr,metric,mean,std\n");
        for r in &rows {
            let lr = r.best_lr.map(|l| l.to_string()).unwrap_or_default();
            for (name, ms) in &r.metrics {
                let _ = writeln!(csv, "{},{},{lr},{name},{},{}", r.arm.as_str(), r.model, ms.mean, ms.std);
            }
        }
        let report = RunReport {
            config_hash: hash.clone(),
            seed: self.cfg.seed,
            rows,
        };
        write_json(&json_path, &report)?;
        let csv_path = self.layout.summary_csv();
        write_file(&csv_path, &csv)?;
        meta(&json_path, Stage::Report, &hash, serde_json::Value::Null)?;
        meta(&csv_path, Stage::Report, &hash, serde_json::Value::Null)?;
        self.mark(true, "report".into());
        Ok(())
    }
}
