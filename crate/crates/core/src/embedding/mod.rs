//! Text encoders shared by sentence clustering and node-feature initialisation.
//!
//! Every encoder returns L2-normalised rows so Euclidean distances between
//! embeddings are monotone in cosine distance regardless of backend.

mod cache;
mod hash;
mod lenb;
mod remote;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{CacheRecord, EmbeddingCache};
pub use hash::{hash_encode_one, HashEncoder};
pub use lenb::{read_lenb, write_lenb};
pub use remote::{RemoteEncoder, EMB_API_KEY_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    Hash,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextEncoderConfig {
    pub kind: EncoderKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default = "default_inflight")]
    pub max_inflight: usize,
}

fn default_dim() -> usize {
    768
}

fn default_inflight() -> usize {
    4
}

impl Default for TextEncoderConfig {
    fn default() -> Self {
        Self::hash(default_dim())
    }
}

impl TextEncoderConfig {
    pub fn hash(dim: usize) -> Self {
        Self {
            kind: EncoderKind::Hash,
            dim,
            endpoint: None,
            model: None,
            max_inflight: default_inflight(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(Error::Config(format!(
                "encoder dim must be at least 8, got {}",
                self.dim
            )));
        }
        if self.max_inflight == 0 {
            return Err(Error::Config("encoder max_inflight must be positive".into()));
        }
        if self.kind == EncoderKind::Remote && (self.endpoint.is_none() || self.model.is_none()) {
            return Err(Error::Config(
                "remote encoder requires both endpoint and model".into(),
            ));
        }
        Ok(())
    }

    /// Stable identity used to key cached vectors.
    pub fn encoder_id(&self) -> String {
        match self.kind {
            EncoderKind::Hash => format!("hash:{}", self.dim),
            EncoderKind::Remote => format!(
                "remote:{}:{}",
                self.model.as_deref().unwrap_or_default(),
                self.dim
            ),
        }
    }

    pub fn build(&self) -> Result<Box<dyn TextEncoder>> {
        self.validate()?;
        Ok(match self.kind {
            EncoderKind::Hash => Box::new(HashEncoder::new(self.dim)?),
            EncoderKind::Remote => Box::new(RemoteEncoder::from_config(self)?),
        })
    }
}

/// Anything that maps texts to unit vectors of a fixed width.
pub trait TextEncoder: Send + Sync {
    fn encoder_id(&self) -> String;

    fn dim(&self) -> usize;

    /// Row `i` of the result encodes `texts[i]`.
    fn encode(&self, texts: &[String]) -> Result<EmbeddingMatrix>;
}

/// Row-major matrix of unit-norm `f32` vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    /// Wraps raw row-major data without renormalising.
    pub fn from_raw(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::Contract(format!(
                "{} values cannot form a {rows}x{dim} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite embedding value in row {}",
                bad / dim.max(1)
            )));
        }
        Ok(Self { rows, dim, data })
    }

    /// L2-normalises each vector; an all-zero vector becomes `e_0`.
    pub fn from_vectors(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(vectors.len() * dim);
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Contract(format!(
                    "vector {i} has dimension {}, expected {dim}",
                    v.len()
                )));
            }
            data.extend(normalize(v)?.into_iter().map(|x| x as f32));
        }
        Self::from_raw(vectors.len(), dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.rows)
    }

    /// Rows widened to `f64`, row-major.
    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| f64::from(v)).collect()
    }

    /// New matrix holding the selected rows in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            dim: self.dim,
            data,
        }
    }
}

pub(crate) fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite embedding component".into()));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        let mut e0 = vec![0.0; v.len()];
        if let Some(first) = e0.first_mut() {
            *first = 1.0;
        }
        return Ok(e0);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

pub(crate) fn check_texts(texts: &[String]) -> Result<()> {
    if texts.is_empty() {
        return Err(Error::Contract("no texts to encode".into()));
    }
    if let Some(i) = texts.iter().position(|t| t.is_empty()) {
        return Err(Error::Contract(format!("text {i} is empty")));
    }
    Ok(())
}

/// Encodes `texts` with the encoder described by `config`.
pub fn encode_texts(config: &TextEncoderConfig, texts: &[String]) -> Result<EmbeddingMatrix> {
    check_texts(texts)?;
    config.build()?.encode(texts)
}
