use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{check_texts, normalize, EmbeddingMatrix, TextEncoder};
use crate::error::{Error, Result};

/// Signed feature hashing over lowercase alphanumeric tokens.
#[derive(Debug, Clone)]
pub struct HashEncoder {
    dim: usize,
}

impl HashEncoder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 8 {
            return Err(Error::Config(format!("hash encoder dim must be >= 8, got {dim}")));
        }
        Ok(Self { dim })
    }
}

impl TextEncoder for HashEncoder {
    fn encoder_id(&self) -> String {
        format!("hash:{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, texts: &[String]) -> Result<EmbeddingMatrix> {
        check_texts(texts)?;
        let rows: Vec<Vec<f32>> = texts
            .par_iter()
            .map(|t| hash_encode_one(self.dim, t))
            .collect();
        EmbeddingMatrix::from_raw(texts.len(), self.dim, rows.concat())
    }
}

/// Hashes one text into a unit vector of width `dim`.
///
/// Each token's SHA-256 digest picks a bucket (first four bytes, big-endian,
/// modulo `dim`) and a sign (`+1` when byte 4 is even). Text without tokens
/// maps to `e_0`.
pub fn hash_encode_one(dim: usize, text: &str) -> Vec<f32> {
    let mut acc = vec![0.0f64; dim];
    let lower = text.to_lowercase();
    for token in lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let digest = Sha256::digest(token.as_bytes());
        let bucket = u32::from_be_bytes([digest[0], digest[1], digest[2], digest[3]]) as usize % dim;
        acc[bucket] += if digest[4] % 2 == 0 { 1.0 } else { -1.0 };
    }
    // Components are small integers, always finite.
    normalize(&acc)
        .expect("finite accumulator")
        .into_iter()
        .map(|v| v as f32)
        .collect()
}
