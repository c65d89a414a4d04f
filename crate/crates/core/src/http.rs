//! Blocking JSON-over-HTTP POST with exponential backoff.

use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Attempts after the first one.
    pub retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub base_backoff: Duration,
    pub timeout: Duration,
}

impl RetryPolicy {
    pub fn backoff(&self, attempt: u32) -> Duration {
        self.base_backoff * 2u32.saturating_pow(attempt)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct HttpFailure {
    pub status: Option<u16>,
    pub message: String,
}

fn retryable(status: StatusCode) -> bool {
    status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS
}

pub(crate) fn build_client(policy: &RetryPolicy) -> Result<Client, HttpFailure> {
    Client::builder()
        .timeout(policy.timeout)
        .build()
        .map_err(|e| HttpFailure {
            status: None,
            message: e.to_string(),
        })
}

pub(crate) fn post_json(
    client: &Client,
    url: &str,
    body: &Value,
    bearer: Option<&str>,
    policy: &RetryPolicy,
) -> Result<Value, HttpFailure> {
    let mut attempt = 0;
    loop {
        let mut req = client.post(url).json(body);
        if let Some(token) = bearer {
            req = req.bearer_auth(token);
        }
        let failure = match req.send() {
            Ok(resp) => {
                let status = resp.status();
                if status.is_success() {
                    return resp.json::<Value>().map_err(|e| HttpFailure {
                        status: Some(status.as_u16()),
                        message: format!("invalid JSON response: {e}"),
                    });
                }
                let text = resp.text().unwrap_or_default();
                let failure = HttpFailure {
                    status: Some(status.as_u16()),
                    message: text.chars().take(500).collect(),
                };
                if !retryable(status) {
                    return Err(failure);
                }
                failure
            }
            Err(e) => HttpFailure {
                status: e.status().map(|s| s.as_u16()),
                message: e.to_string(),
            },
        };
        if attempt >= policy.retries {
            return Err(failure);
        }
        log::warn!(
            "POST {url} failed ({}), retrying in {:?}",
            failure.message,
            policy.backoff(attempt)
        );
        thread::sleep(policy.backoff(attempt));
        attempt += 1;
    }
}
