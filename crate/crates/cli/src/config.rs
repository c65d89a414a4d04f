//! The run configuration file: parsing, defaults and validation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use lenie_core::augment::{LlmBackendConfig, PromptTemplate};
use lenie_core::embedding::TextEncoderConfig;
use lenie_core::eval::{EvalSettings, FeatureSource};
use lenie_core::models::{ModelConfig, ModelKind};
use lenie_core::sampler::{SamplerConfig, SamplingStrategy};
use serde::{Deserialize, Serialize};

/// A configuration problem together with the field it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Path-like locator such as `sampler.strategy` or `models[0].epochs`.
    pub locator: String,
    pub message: String,
}

impl ConfigError {
    fn at(locator: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            locator: locator.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.locator.is_empty() || self.locator == "." {
            write!(f, "invalid config: {}", self.message)
        } else {
            write!(f, "invalid config at `{}`: {}", self.locator, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    /// Paths are relative to the config file; they default to `data/{name}/<file>.tsv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triplets: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    /// Strategy used for the `concat` arm; the augmented arms name their own.
    #[serde(default = "d_strategy")]
    pub strategy: SamplingStrategy,
    /// Defaults per dataset name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "d_kmeans_iters")]
    pub kmeans_max_iters: usize,
    #[serde(default = "d_kmeans_tol")]
    pub kmeans_tol: f64,
}

fn d_strategy() -> SamplingStrategy {
    SamplingStrategy::Cluster
}
fn d_kmeans_iters() -> usize {
    100
}
fn d_kmeans_tol() -> f64 {
    1e-6
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            strategy: d_strategy(),
            k: None,
            kmeans_max_iters: d_kmeans_iters(),
            kmeans_tol: d_kmeans_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub encoder: TextEncoderConfig,
    #[serde(default)]
    pub prompt: PromptTemplate,
    #[serde(default)]
    pub backend: LlmBackendConfig,
    #[serde(default = "d_models")]
    pub models: Vec<ModelConfig>,
    #[serde(default)]
    pub evaluation: EvalSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<FeatureSource>>,
    /// Global seed for sampling, fold splits and model initialisation.
    pub seed: u64,
    #[serde(default = "d_output")]
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn d_models() -> Vec<ModelConfig> {
    vec![ModelConfig::new(ModelKind::Gnn)]
}
fn d_output() -> PathBuf {
    PathBuf::from("runs")
}

/// Triplets sampled per node when the config leaves `sampler.k` unset.
pub fn default_k(dataset: &str) -> usize {
    match dataset.to_ascii_uppercase().as_str() {
        "FB15K" => 10,
        "TMDB5K" => 5,
        "MUSIC10K" => 3,
        _ => 10,
    }
}

impl RunConfig {
    pub fn k(&self) -> usize {
        self.sampler.k.unwrap_or_else(|| default_k(&self.dataset.name))
    }

    pub fn arms(&self) -> Vec<FeatureSource> {
        self.arms.clone().unwrap_or_default()
    }

    pub fn sampler_config(&self, strategy: SamplingStrategy) -> SamplerConfig {
        SamplerConfig {
            strategy,
            k: self.k(),
            seed: self.seed,
            kmeans_max_iters: self.sampler.kmeans_max_iters,
            kmeans_tol: self.sampler.kmeans_tol,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn dataset_paths(&self) -> [PathBuf; 3] {
        let d = &self.dataset;
        [&d.entities, &d.relations, &d.triplets].map(|p| self.resolve(p.as_deref().expect("normalized")))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// The normalized config as canonical JSON (object keys sorted).
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Parses and normalizes a config held in memory; relative paths
    /// resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let locator = e.path().to_string();
            ConfigError::at(locator, e.into_inner())
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.normalize()?;
        Ok(cfg)
    }

    fn normalize(&mut self) -> Result<(), ConfigError> {
        if self.dataset.name.trim().is_empty() {
            return Err(ConfigError::at("dataset.name", "must not be empty"));
        }
        let dir = PathBuf::from("data").join(&self.dataset.name);
        for (slot, file) in [
            (&mut self.dataset.entities, "entities.tsv"),
            (&mut self.dataset.relations, "relations.tsv"),
            (&mut self.dataset.triplets, "triplets.tsv"),
        ] {
            slot.get_or_insert_with(|| dir.join(file));
        }
        self.sampler.k.get_or_insert(default_k(&self.dataset.name));
        if self.arms.is_none() {
            let default_arm = match self.sampler.strategy {
                SamplingStrategy::Random => FeatureSource::AugmentedRandom,
                SamplingStrategy::Cluster => FeatureSource::AugmentedCluster,
            };
            self.arms = Some(vec![default_arm]);
        }
        self.check()
    }

    fn check(&self) -> Result<(), ConfigError> {
        for (field, p) in ["entities", "relations", "triplets"].iter().zip(self.dataset_paths()) {
            if !p.is_file() {
                return Err(ConfigError::at(
                    format!("dataset.{field}"),
                    format!("file {} does not exist", p.display()),
                ));
            }
        }
        self.sampler_config(self.sampler.strategy)
            .validate()
            .map_err(|e| ConfigError::at("sampler", e))?;
        self.encoder.validate().map_err(|e| ConfigError::at("encoder", e))?;
        self.prompt.validate().map_err(|e| ConfigError::at("prompt", e))?;
        self.backend.validate().map_err(|e| ConfigError::at("backend", e))?;
        if self.models.is_empty() {
            return Err(ConfigError::at("models", "at least one model is required"));
        }
        for (i, m) in self.models.iter().enumerate() {
            m.validate().map_err(|e| ConfigError::at(format!("models[{i}]"), e))?;
            if self.models[..i].iter().any(|o| o.kind == m.kind) {
                return Err(ConfigError::at(
                    format!("models[{i}].kind"),
                    format!("model kind {} listed twice", m.kind.as_str()),
                ));
            }
        }
        let ev = &self.evaluation;
        if ev.folds < 2 {
            return Err(ConfigError::at("evaluation.folds", "need at least 2 folds"));
        }
        if ev.k == 0 {
            return Err(ConfigError::at("evaluation.k", "must be at least 1"));
        }
        if ev.lr_grid.is_empty() {
            return Err(ConfigError::at("evaluation.lr_grid", "must not be empty"));
        }
        if let Some(i) = ev.lr_grid.iter().position(|lr| !(lr.is_finite() && *lr > 0.0)) {
            return Err(ConfigError::at(
                format!("evaluation.lr_grid[{i}]"),
                "learning rates must be positive and finite",
            ));
        }
        let arms = self.arms();
        if arms.is_empty() {
            return Err(ConfigError::at("arms", "at least one arm is required"));
        }
        for (i, a) in arms.iter().enumerate() {
            if arms[..i].contains(a) {
                return Err(ConfigError::at(
                    format!("arms[{i}]"),
                    format!("arm {} listed twice", a.as_str()),
                ));
            }
        }
        Ok(())
    }
}

/// Reads, parses and normalizes the config file at `path`.
pub fn validate_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    RunConfig::from_json(&text, &base)
}
