use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::client::CompletionRequest;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    /// Worth retrying: timeouts, rate limits, 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("fatal: {0}")]
    Fatal(String),
}

/// A language model that can rank candidate answers.
///
/// Implementations return at most `top_k` `(answer, probability)` pairs with
/// probabilities in `[0, 1]`.
pub trait LlmProvider: Send + Sync {
    /// Stable identifier, part of every cache key.
    fn id(&self) -> String;

    fn complete(&self, request: &CompletionRequest) -> Result<Vec<(String, f64)>, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub multiplier: f64,
    pub max_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 4,
            initial_backoff_ms: 500,
            multiplier: 2.0,
            max_backoff_ms: 30_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (0-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.initial_backoff_ms as f64 * self.multiplier.powi(attempt as i32);
        Duration::from_millis(ms.min(self.max_backoff_ms as f64) as u64)
    }
}

/// Provider connection and decoding settings.
///
/// Credentials are never stored here; `api_key_env` names the environment
/// variable that holds them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub api_key_env: String,
    pub model: String,
    pub top_k: usize,
    pub temperature: f64,
    /// Tokens the provider must never emit as an answer.
    pub stop_list: Vec<String>,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    /// Upper bound on concurrent in-flight requests.
    pub max_in_flight: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: "https://api.openai.com/v1".into(),
            api_key_env: "GRACE_LLM_API_KEY".into(),
            model: "gpt-4o-mini".into(),
            top_k: 5,
            temperature: 0.0,
            stop_list: Vec::new(),
            timeout_secs: 60,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
        }
    }
}

/// One substring rule: every needle must occur in the prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub contains: Vec<String>,
    pub response: Vec<(String, f64)>,
}

/// On-disk form of a [`MockProvider`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MockFixture {
    pub id: String,
    /// Prompt SHA-256 (hex) → scripted response.
    pub exact: HashMap<String, Vec<(String, f64)>>,
    /// Checked in order after `exact`.
    pub rules: Vec<MockRule>,
    pub default: Option<Vec<(String, f64)>>,
}

/// Table-driven offline provider.
///
/// Lookup order: exact prompt hash, then substring rules, then the default.
/// Unmatched prompts fail fatally. A number of leading calls can be scripted
/// to fail transiently to exercise retry paths.
#[derive(Debug, Default)]
pub struct MockProvider {
    fixture: MockFixture,
    fail_first: AtomicUsize,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(id: impl Into<String>) -> Self {
        MockProvider {
            fixture: MockFixture {
                id: id.into(),
                ..MockFixture::default()
            },
            ..MockProvider::default()
        }
    }

    pub fn from_fixture(fixture: MockFixture) -> Self {
        MockProvider {
            fixture,
            ..MockProvider::default()
        }
    }

    pub fn fixture(&self) -> &MockFixture {
        &self.fixture
    }

    pub fn with_exact(mut self, prompt: &str, response: Vec<(String, f64)>) -> Self {
        self.fixture.exact.insert(prompt_hash(prompt), response);
        self
    }

    pub fn with_rule<S: Into<String>>(
        mut self,
        contains: impl IntoIterator<Item = S>,
        response: Vec<(String, f64)>,
    ) -> Self {
        self.fixture.rules.push(MockRule {
            contains: contains.into_iter().map(Into::into).collect(),
            response,
        });
        self
    }

    pub fn with_default(mut self, response: Vec<(String, f64)>) -> Self {
        self.fixture.default = Some(response);
        self
    }

    /// The next `n` calls fail with [`ProviderError::Transient`].
    pub fn failing_first(self, n: usize) -> Self {
        self.fail_first.store(n, Ordering::SeqCst);
        self
    }

    /// Number of `complete` calls received, including failed ones.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl LlmProvider for MockProvider {
    fn id(&self) -> String {
        format!("mock:{}", self.fixture.id)
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Vec<(String, f64)>, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if self
            .fail_first
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok()
        {
            return Err(ProviderError::Transient("scripted failure".into()));
        }
        let prompt = &request.prompt;
        let found = self
            .fixture
            .exact
            .get(&prompt_hash(prompt))
            .or_else(|| {
                self.fixture
                    .rules
                    .iter()
                    .find(|r| r.contains.iter().all(|n| prompt.contains(n.as_str())))
                    .map(|r| &r.response)
            })
            .or(self.fixture.default.as_ref())
            .ok_or_else(|| ProviderError::Fatal("no scripted response for prompt".into()))?;
        let mut out = found.clone();
        out.truncate(request.top_k.max(1));
        Ok(out)
    }
}

/// Hex SHA-256 of a prompt, the key of [`MockFixture::exact`].
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(prompt: &str) -> CompletionRequest {
        CompletionRequest {
            prompt: prompt.into(),
            options: vec![],
            top_k: 5,
        }
    }

    #[test]
    fn lookup_order() {
        let p = MockProvider::new("t")
            .with_exact("exact prompt", vec![("1".into(), 1.0)])
            .with_rule(["needle"], vec![("2".into(), 1.0)])
            .with_default(vec![("3".into(), 1.0)]);
        assert_eq!(p.complete(&req("exact prompt")).unwrap()[0].0, "1");
        assert_eq!(p.complete(&req("a needle here")).unwrap()[0].0, "2");
        assert_eq!(p.complete(&req("other")).unwrap()[0].0, "3");
        assert_eq!(p.calls(), 3);
    }

    #[test]
    fn unmatched_is_fatal_and_scripted_failures_are_transient() {
        let p = MockProvider::new("t").failing_first(1);
        assert!(matches!(p.complete(&req("x")), Err(ProviderError::Transient(_))));
        assert!(matches!(p.complete(&req("x")), Err(ProviderError::Fatal(_))));
    }

    #[test]
    fn backoff_grows_and_caps() {
        let r = RetryPolicy {
            max_retries: 5,
            initial_backoff_ms: 100,
            multiplier: 2.0,
            max_backoff_ms: 350,
        };
        assert_eq!(r.backoff(0), Duration::from_millis(100));
        assert_eq!(r.backoff(1), Duration::from_millis(200));
        assert_eq!(r.backoff(2), Duration::from_millis(350));
    }

    #[test]
    fn top_k_truncates() {
        let p = MockProvider::new("t").with_default(vec![
            ("1".into(), 0.5),
            ("2".into(), 0.3),
            ("3".into(), 0.2),
        ]);
        let mut r = req("x");
        r.top_k = 2;
        assert_eq!(p.complete(&r).unwrap().len(), 2);
    }
}
