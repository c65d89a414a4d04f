use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::prompt::Prompt;
use crate::error::{Error, Result};
use crate::http::{build_client, post_json, RetryPolicy};
use crate::kg::EntityId;

pub const LLM_API_KEY_ENV: &str = "LENIE_LLM_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    ChatHttp,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmBackendConfig {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "d_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "d_retries")]
    pub retries: u32,
    #[serde(default = "d_inflight")]
    pub max_inflight: usize,
}

fn d_max_tokens() -> u32 {
    512
}
fn d_retries() -> u32 {
    3
}
fn d_inflight() -> usize {
    2
}

impl Default for LlmBackendConfig {
    fn default() -> Self {
        Self::mock()
    }
}

impl LlmBackendConfig {
    pub fn mock() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            model: None,
            temperature: 0.0,
            max_tokens: d_max_tokens(),
            retries: d_retries(),
            max_inflight: d_inflight(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) {
            return Err(Error::Config("temperature must be non-negative".into()));
        }
        if self.max_tokens == 0 || self.max_inflight == 0 {
            return Err(Error::Config("max_tokens and max_inflight must be positive".into()));
        }
        if self.kind == BackendKind::ChatHttp && (self.endpoint.is_none() || self.model.is_none()) {
            return Err(Error::Config("chat_http backend requires endpoint and model".into()));
        }
        Ok(())
    }

    pub fn backend_id(&self) -> String {
        match self.kind {
            BackendKind::Mock => "mock".to_string(),
            BackendKind::ChatHttp => format!(
                "chat_http:{}:t={}:max_tokens={}",
                self.model.as_deref().unwrap_or_default(),
                self.temperature,
                self.max_tokens
            ),
        }
    }

    pub fn build(&self) -> Result<Box<dyn LlmBackend>> {
        self.validate()?;
        Ok(match self.kind {
            BackendKind::Mock => Box::new(MockBackend),
            BackendKind::ChatHttp => Box::new(ChatBackend::from_config(self)?),
        })
    }
}

pub trait LlmBackend: Send + Sync {
    fn backend_id(&self) -> String;

    /// Raw completion text for the prompt.
    fn complete(&self, prompt: &Prompt) -> Result<String>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedDescription {
    pub node: EntityId,
    pub text: String,
    pub prompt_hash: String,
    pub backend_id: String,
}

/// Runs one generation and attaches provenance.
pub fn generate_description(
    backend: &dyn LlmBackend,
    prompt: &Prompt,
) -> Result<AugmentedDescription> {
    let text = backend.complete(prompt)?;
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::EmptyGeneration { node: prompt.node });
    }
    Ok(AugmentedDescription {
        node: prompt.node,
        text: text.to_string(),
        prompt_hash: prompt.prompt_hash.clone(),
        backend_id: backend.backend_id(),
    })
}

/// Offline stand-in that restates the prompt's inputs.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl LlmBackend for MockBackend {
    fn backend_id(&self) -> String {
        "mock".to_string()
    }

    fn complete(&self, prompt: &Prompt) -> Result<String> {
        let mut out = format!(
            "Summary of {}: {} Known facts:",
            prompt.node_name, prompt.description
        );
        for s in &prompt.sentences {
            out.push(' ');
            out.push_str(s);
        }
        Ok(out)
    }
}

/// OpenAI-compatible `/v1/chat/completions` client.
pub struct ChatBackend {
    url: String,
    model: String,
    temperature: f64,
    max_tokens: u32,
    api_key: Option<String>,
    policy: RetryPolicy,
    client: Client,
    id: String,
}

impl ChatBackend {
    pub fn from_config(config: &LlmBackendConfig) -> Result<Self> {
        let policy = RetryPolicy {
            retries: config.retries,
            base_backoff: Duration::from_secs(2),
            timeout: Duration::from_secs(120),
        };
        Self::with_policy(config, policy)
    }

    pub fn with_policy(config: &LlmBackendConfig, policy: RetryPolicy) -> Result<Self> {
        config.validate()?;
        let (Some(endpoint), Some(model)) = (&config.endpoint, &config.model) else {
            return Err(Error::Config("chat_http backend requires endpoint and model".into()));
        };
        let client = build_client(&policy).map_err(|f| Error::Backend {
            status: f.status,
            message: f.message,
        })?;
        Ok(Self {
            url: format!("{}/v1/chat/completions", endpoint.trim_end_matches('/')),
            model: model.clone(),
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            api_key: std::env::var(LLM_API_KEY_ENV).ok(),
            policy,
            client,
            id: config.backend_id(),
        })
    }
}

impl LlmBackend for ChatBackend {
    fn backend_id(&self) -> String {
        self.id.clone()
    }

    fn complete(&self, prompt: &Prompt) -> Result<String> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "messages": [{ "role": "user", "content": prompt.text }],
        });
        let reply = post_json(&self.client, &self.url, &body, self.api_key.as_deref(), &self.policy)
            .map_err(|f| Error::Backend {
                status: f.status,
                message: f.message,
            })?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Error::Backend {
                status: None,
                message: "response has no choices[0].message.content".into(),
            })
    }
}
