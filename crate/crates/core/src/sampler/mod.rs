//! Per-node triplet-sentence sampling: uniform random or clustering-based.

mod kmeans;

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingMatrix, TextEncoder};
use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};

pub use kmeans::{kmeans_fit, ClusterResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingStrategy {
    Random,
    Cluster,
}

impl SamplingStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingStrategy::Random => "random",
            SamplingStrategy::Cluster => "cluster",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub strategy: SamplingStrategy,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub kmeans_max_iters: usize,
    #[serde(default = "default_tol")]
    pub kmeans_tol: f64,
}

fn default_max_iters() -> usize {
    100
}

fn default_tol() -> f64 {
    1e-6
}

impl SamplerConfig {
    pub fn new(strategy: SamplingStrategy, k: usize, seed: u64) -> Self {
        Self {
            strategy,
            k,
            seed,
            kmeans_max_iters: default_max_iters(),
            kmeans_tol: default_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("sampler k must be at least 1".into()));
        }
        if self.kmeans_max_iters == 0 || !(self.kmeans_tol > 0.0) {
            return Err(Error::Config(
                "kmeans_max_iters and kmeans_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledContext {
    pub node: EntityId,
    pub strategy: SamplingStrategy,
    #[serde(rename = "k")]
    pub k_requested: usize,
    pub sentences: Vec<String>,
}

/// Templated sentences for every triplet of `node`, first occurrences only.
pub fn node_sentences(kg: &KnowledgeGraph, node: EntityId) -> Result<Vec<String>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in kg.node_triplets(node)? {
        let s = kg.sentence(&t)?;
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Draws `min(k, n)` sentences uniformly without replacement, keeping their
/// original relative order.
pub fn sample_random(sentences: &[String], k: usize, seed: u64) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::Config("sampler k must be at least 1".into()));
    }
    let n = sentences.len();
    if k >= n {
        return Ok(sentences.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| sentences[i].clone()).collect())
}

/// For each center, the sentence whose embedding is closest (ties to the
/// lower sentence index); duplicates collapse and output keeps input order.
pub fn select_nearest_sentences(
    sentences: &[String],
    embeddings: &EmbeddingMatrix,
    result: &ClusterResult,
) -> Result<Vec<String>> {
    if embeddings.rows() != sentences.len() || embeddings.dim() != result.dim {
        return Err(Error::Contract(format!(
            "{} sentences, {}x{} embeddings, centers of width {}",
            sentences.len(),
            embeddings.rows(),
            embeddings.dim(),
            result.dim
        )));
    }
    let points: Vec<Vec<f64>> = embeddings
        .iter_rows()
        .map(|r| r.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let mut keep = vec![false; sentences.len()];
    for j in 0..result.k() {
        let c = result.center(j);
        let mut best = (0, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = kmeans::sq_dist(p, c);
            if d < best.1 {
                best = (i, d);
            }
        }
        keep[best.0] = true;
    }
    Ok(sentences
        .iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then(|| s.clone()))
        .collect())
}

/// Samples the representative triplet sentences of `node`.
///
/// The per-node seed is `config.seed ^ node`, so nodes can be processed in
/// any order or in parallel with identical results.
pub fn sample_triplets(
    kg: &KnowledgeGraph,
    node: EntityId,
    encoder: &dyn TextEncoder,
    config: &SamplerConfig,
) -> Result<SampledContext> {
    config.validate()?;
    let sentences = node_sentences(kg, node)?;
    let seed = config.seed ^ node as u64;
    let chosen = match config.strategy {
        SamplingStrategy::Random => sample_random(&sentences, config.k, seed)?,
        SamplingStrategy::Cluster if sentences.len() <= config.k => sentences,
        SamplingStrategy::Cluster => {
            let emb = encoder.encode(&sentences)?;
            let fit = kmeans_fit(
                &emb.to_f64(),
                emb.dim(),
                config.k,
                seed,
                config.kmeans_max_iters,
                config.kmeans_tol,
            )?;
            select_nearest_sentences(&sentences, &emb, &fit)?
        }
    };
    Ok(SampledContext {
        node,
        strategy: config.strategy,
        k_requested: config.k,
        sentences: chosen,
    })
}
