use std::time::Duration;

use serde_json::{json, Value};

use super::client::CompletionRequest;
use super::provider::{LlmProvider, ProviderConfig, ProviderError};

/// Chat-completions endpoint that exposes first-token log-probabilities
/// (`logprobs` / `top_logprobs`), as served by OpenAI and most
/// OpenAI-compatible local servers.
pub struct OpenAiCompatibleProvider {
    config: ProviderConfig,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl OpenAiCompatibleProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Fatal(e.to_string()))?;
        let api_key = std::env::var(&config.api_key_env).ok();
        Ok(OpenAiCompatibleProvider {
            config,
            api_key,
            http,
        })
    }
}

impl LlmProvider for OpenAiCompatibleProvider {
    fn id(&self) -> String {
        format!("openai-compatible:{}@{}", self.config.model, self.config.endpoint)
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Vec<(String, f64)>, ProviderError> {
        let url = format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": self.config.temperature,
            "max_tokens": 1,
            "logprobs": true,
            "top_logprobs": request.top_k.clamp(1, 20),
        });
        let mut req = self.http.post(url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() || e.is_connect() {
                ProviderError::Transient(e.to_string())
            } else {
                ProviderError::Fatal(e.to_string())
            }
        })?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ProviderError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Fatal(format!("HTTP {status}")));
        }
        let v: Value = resp
            .json()
            .map_err(|e| ProviderError::Transient(format!("bad response body: {e}")))?;
        let top = v
            .pointer("/choices/0/logprobs/content/0/top_logprobs")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::Fatal("response carries no top_logprobs".into()))?;
        Ok(top
            .iter()
            .filter_map(|t| {
                let token = t.get("token")?.as_str()?.trim().to_string();
                let lp = t.get("logprob")?.as_f64()?;
                Some((token, lp.exp()))
            })
            .take(request.top_k)
            .collect())
    }
}
