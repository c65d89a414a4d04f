//! Artifact layout, config hashes and `.meta.json` sidecars.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use lenie_core::eval::FeatureSource;
use lenie_core::models::ModelKind;
use lenie_core::sampler::SamplingStrategy;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// SHA-256 hex of the canonical JSON form of `value`.
pub fn config_hash(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub stage: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub info: serde_json::Value,
}

pub fn meta_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    artifact.with_file_name(name)
}

pub fn read_meta(artifact: &Path) -> Option<Meta> {
    let text = fs::read_to_string(meta_path(artifact)).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn write_meta(artifact: &Path, meta: &Meta) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(meta).expect("meta serializes");
    text.push('\n');
    fs::write(meta_path(artifact), text)
}

/// True when `artifact` exists and its sidecar records `hash`.
pub fn is_current(artifact: &Path, hash: &str) -> bool {
    artifact.is_file() && read_meta(artifact).is_some_and(|m| m.config_hash == hash)
}

/// File names inside one seed's output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub dir: PathBuf,
}

impl Layout {
    pub fn new(output_dir: &Path, seed: u64) -> Self {
        Self {
            dir: output_dir.join(format!("seed{seed}")),
        }
    }

    pub fn kg_summary(&self) -> PathBuf {
        self.dir.join("kg_summary.json")
    }

    pub fn samples(&self, s: SamplingStrategy) -> PathBuf {
        self.dir.join(format!("samples_{}.jsonl", s.as_str()))
    }

    pub fn augment(&self, s: SamplingStrategy) -> PathBuf {
        self.dir.join(format!("augment_{}.jsonl", s.as_str()))
    }

    pub fn embeddings(&self, arm: FeatureSource) -> PathBuf {
        self.dir.join(format!("embeddings_{}.lenb", arm.as_str()))
    }

    pub fn embedding_cache(&self) -> PathBuf {
        self.dir.join("embedding_cache.jsonl")
    }

    pub fn checkpoint(&self, arm: FeatureSource, kind: ModelKind) -> PathBuf {
        self.dir.join(format!("model_{}_{}.lenm", arm.as_str(), kind.as_str()))
    }

    pub fn predictions(&self, arm: FeatureSource, kind: ModelKind) -> PathBuf {
        self.dir.join(format!("predictions_{}_{}.tsv", arm.as_str(), kind.as_str()))
    }

    pub fn report_json(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}.json"))
    }

    pub fn report_csv(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}.csv"))
    }

    pub fn report_timings(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}.timings.json"))
    }

    pub fn summary_json(&self) -> PathBuf {
        self.dir.join("summary.json")
    }

    pub fn summary_csv(&self) -> PathBuf {
        self.dir.join("summary.csv")
    }
}

/// Report file stem, matching the one the experiment report derives itself.
pub fn report_stem(arm: FeatureSource, kind: ModelKind, seed: u64) -> String {
    format!("report_{}_{}_seed{seed}", arm.as_str(), kind.as_str())
}
