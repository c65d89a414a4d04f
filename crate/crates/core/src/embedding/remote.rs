use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::{json, Value};

use super::{check_texts, normalize, EmbeddingMatrix, TextEncoder, TextEncoderConfig};
use crate::error::{Error, Result};
use crate::http::{build_client, post_json, HttpFailure, RetryPolicy};

pub const EMB_API_KEY_ENV: &str = "LENIE_EMB_API_KEY";

const BATCH: usize = 32;

/// OpenAI-compatible `/v1/embeddings` client.
pub struct RemoteEncoder {
    url: String,
    model: String,
    dim: usize,
    max_inflight: usize,
    api_key: Option<String>,
    policy: RetryPolicy,
    client: Client,
}

impl RemoteEncoder {
    pub fn from_config(config: &TextEncoderConfig) -> Result<Self> {
        config.validate()?;
        let policy = RetryPolicy {
            retries: 3,
            base_backoff: Duration::from_secs(1),
            timeout: Duration::from_secs(30),
        };
        Self::with_policy(config, policy)
    }

    pub fn with_policy(config: &TextEncoderConfig, policy: RetryPolicy) -> Result<Self> {
        let (Some(endpoint), Some(model)) = (&config.endpoint, &config.model) else {
            return Err(Error::Config("remote encoder requires endpoint and model".into()));
        };
        let client = build_client(&policy).map_err(to_error)?;
        Ok(Self {
            url: format!("{}/v1/embeddings", endpoint.trim_end_matches('/')),
            model: model.clone(),
            dim: config.dim,
            max_inflight: config.max_inflight.max(1),
            api_key: std::env::var(EMB_API_KEY_ENV).ok(),
            policy,
            client,
        })
    }

    fn encode_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let body = json!({ "model": self.model, "input": texts });
        let reply = post_json(&self.client, &self.url, &body, self.api_key.as_deref(), &self.policy)
            .map_err(to_error)?;
        let data = reply
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Contract("embedding response has no `data` array".into()))?;
        if data.len() != texts.len() {
            return Err(Error::Contract(format!(
                "embedding response has {} items for {} inputs",
                data.len(),
                texts.len()
            )));
        }
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        for (pos, item) in data.iter().enumerate() {
            let idx = item
                .get("index")
                .and_then(Value::as_u64)
                .map(|i| i as usize)
                .unwrap_or(pos);
            let vec: Vec<f64> = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Contract(format!("item {pos} has no embedding")))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Error::Contract("non-numeric embedding value".into())))
                .collect::<Result<_>>()?;
            if vec.len() != self.dim {
                return Err(Error::Contract(format!(
                    "remote embedding has dimension {}, configured dim is {}",
                    vec.len(),
                    self.dim
                )));
            }
            let slot = out
                .get_mut(idx)
                .ok_or_else(|| Error::Contract(format!("response index {idx} out of range")))?;
            *slot = Some(normalize(&vec)?);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Contract(format!("missing embedding for input {i}"))))
            .collect()
    }
}

fn to_error(f: HttpFailure) -> Error {
    Error::Encoder {
        status: f.status,
        message: f.message,
    }
}

impl TextEncoder for RemoteEncoder {
    fn encoder_id(&self) -> String {
        format!("remote:{}:{}", self.model, self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, texts: &[String]) -> Result<EmbeddingMatrix> {
        check_texts(texts)?;
        let batches: Vec<&[String]> = texts.chunks(BATCH).collect();
        let results: Mutex<Vec<Option<Result<Vec<Vec<f64>>>>>> =
            Mutex::new((0..batches.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..self.max_inflight.min(batches.len()) {
                s.spawn(|| loop {
                    let b = next.fetch_add(1, Ordering::SeqCst);
                    if b >= batches.len() {
                        break;
                    }
                    let r = self.encode_batch(batches[b]);
                    results.lock().unwrap()[b] = Some(r);
                });
            }
        });
        let mut rows = Vec::with_capacity(texts.len());
        for r in results.into_inner().unwrap() {
            rows.extend(r.expect("every batch processed")?);
        }
        EmbeddingMatrix::from_vectors(self.dim, &rows)
    }
}
