//! OpenAI-compatible chat-completion client.

use std::collections::BTreeMap;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::RETRY_AFTER;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::backend::{Backend, BackendDescriptor, BackendError, BackendKind, ChatRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpChatConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    120
}

pub struct HttpChat {
    descriptor: BackendDescriptor,
    config: HttpChatConfig,
    api_key: Option<String>,
    client: Client,
}

impl HttpChat {
    pub fn new(id: impl Into<String>, config: HttpChatConfig) -> Result<Self, BackendError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| BackendError::Rejected(format!("environment variable {var} is not set")))?,
            ),
            None => None,
        };
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let mut desc = BTreeMap::new();
        desc.insert("endpoint".to_string(), config.endpoint.clone());
        desc.insert("model".to_string(), config.model.clone());
        Ok(Self {
            descriptor: BackendDescriptor {
                backend_id: id.into(),
                kind: BackendKind::HttpChat,
                config: desc,
            },
            config,
            api_key,
            client,
        })
    }
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

fn retry_after(resp: &reqwest::blocking::Response) -> Option<Duration> {
    let value = resp.headers().get(RETRY_AFTER)?.to_str().ok()?;
    value.trim().parse::<f64>().ok().map(Duration::from_secs_f64)
}

impl Backend for HttpChat {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model,
            "messages": [{ "role": "user", "content": req.user_message() }],
        });
        let mut builder = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder.send().map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let status = resp.status();
        if status == StatusCode::TOO_MANY_REQUESTS {
            return Err(BackendError::RateLimited {
                retry_after: retry_after(&resp),
            });
        }
        if status.is_server_error() {
            return Err(BackendError::Unavailable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(BackendError::Rejected(format!("HTTP {status}: {}", text.trim())));
        }
        let completion: Completion = resp
            .json()
            .map_err(|e| BackendError::Rejected(format!("malformed completion: {e}")))?;
        completion
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError::Rejected("completion has no message content".into()))
    }
}
