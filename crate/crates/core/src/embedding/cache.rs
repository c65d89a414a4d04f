use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmbeddingMatrix, TextEncoder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub enc: String,
    pub key: String,
    pub vec: Vec<f32>,
}

/// Append-only JSONL store of vectors keyed by `(encoder_id, sha256(text))`.
pub struct EmbeddingCache {
    path: PathBuf,
    entries: HashMap<(String, String), Vec<f32>>,
}

pub fn text_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl EmbeddingCache {
    /// Opens the cache at `path`, loading any existing records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            for (n, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(line).map_err(|e| Error::Cache {
                    key: key_hint(line).unwrap_or_else(|| format!("<line {}>", n + 1)),
                    reason: e.to_string(),
                })?;
                if rec.key.len() != 64 || !rec.key.bytes().all(|b| b.is_ascii_hexdigit()) {
                    return Err(Error::Cache {
                        key: rec.key,
                        reason: "key is not a hex SHA-256 digest".into(),
                    });
                }
                if rec.vec.is_empty() || rec.vec.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Cache {
                        key: rec.key,
                        reason: "vector is empty or non-finite".into(),
                    });
                }
                entries.insert((rec.enc, rec.key), rec.vec);
            }
        }
        Ok(Self { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, encoder_id: &str, text: &str) -> Option<&[f32]> {
        self.entries
            .get(&(encoder_id.to_string(), text_key(text)))
            .map(Vec::as_slice)
    }

    /// Returns the same matrix as `encoder.encode(texts)`, encoding only texts
    /// not already cached and appending the new vectors to the store.
    pub fn get_or_encode(
        &mut self,
        encoder: &dyn TextEncoder,
        texts: &[String],
    ) -> Result<EmbeddingMatrix> {
        super::check_texts(texts)?;
        let enc = encoder.encoder_id();
        let dim = encoder.dim();
        let keys: Vec<String> = texts.iter().map(|t| text_key(t)).collect();

        let mut missing: Vec<String> = Vec::new();
        let mut missing_keys: Vec<&str> = Vec::new();
        for (t, k) in texts.iter().zip(&keys) {
            let id = (enc.clone(), k.clone());
            if !self.entries.contains_key(&id) && !missing_keys.contains(&k.as_str()) {
                missing.push(t.clone());
                missing_keys.push(k);
            }
        }

        if !missing.is_empty() {
            let fresh = encoder.encode(&missing)?;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| Error::io(&self.path, e))?;
            let mut w = BufWriter::new(file);
            for (k, row) in missing_keys.iter().zip(fresh.iter_rows()) {
                let rec = CacheRecord {
                    enc: enc.clone(),
                    key: k.to_string(),
                    vec: row.to_vec(),
                };
                serde_json::to_writer(&mut w, &rec)?;
                w.write_all(b"\n").map_err(|e| Error::io(&self.path, e))?;
                self.entries.insert((enc.clone(), k.to_string()), rec.vec);
            }
            flush(w, &self.path)?;
        }

        let mut data = Vec::with_capacity(texts.len() * dim);
        for k in &keys {
            let v = &self.entries[&(enc.clone(), k.clone())];
            if v.len() != dim {
                return Err(Error::Cache {
                    key: k.clone(),
                    reason: format!("cached vector has dimension {}, encoder has {dim}", v.len()),
                });
            }
            data.extend_from_slice(v);
        }
        EmbeddingMatrix::from_raw(texts.len(), dim, data)
    }
}

fn flush(w: BufWriter<File>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .sync_data()
        .map_err(|e| Error::io(path, e))
}

fn key_hint(line: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    v.get("key")?.as_str().map(str::to_string)
}
