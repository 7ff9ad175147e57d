use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cache::{CacheRecord, ResponseCache};
use super::provider::{LlmProvider, ProviderConfig, ProviderError};
use super::{LlmError, Result};

/// A single ranked-answer request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    /// Candidate answers; providers may use them to constrain decoding.
    pub options: Vec<String>,
    pub top_k: usize,
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Provider wrapper with caching and retry.
pub struct LlmClient {
    provider: Arc<dyn LlmProvider>,
    config: ProviderConfig,
    cache: ResponseCache,
    sleeper: Sleeper,
    requests: AtomicUsize,
}

impl std::fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmClient")
            .field("provider", &self.provider.id())
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn new(provider: Arc<dyn LlmProvider>, config: ProviderConfig, cache: ResponseCache) -> Self {
        LlmClient {
            provider,
            config,
            cache,
            sleeper: Arc::new(std::thread::sleep),
            requests: AtomicUsize::new(0),
        }
    }

    /// Replaces the backoff sleep, e.g. with a no-op in tests.
    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Arc::new(sleeper);
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub fn provider_id(&self) -> String {
        self.provider.id()
    }

    /// Provider requests issued by this client (cache misses, retries included).
    pub fn provider_requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    /// Content hash of everything that influences the provider's answer.
    pub fn cache_key(&self, request: &CompletionRequest) -> String {
        #[derive(Serialize)]
        struct KeyMaterial<'a> {
            provider: String,
            model: &'a str,
            temperature: f64,
            stop_list: &'a [String],
            top_k: usize,
            options: &'a [String],
            prompt: &'a str,
        }
        let material = KeyMaterial {
            provider: self.provider.id(),
            model: &self.config.model,
            temperature: self.config.temperature,
            stop_list: &self.config.stop_list,
            top_k: request.top_k,
            options: &request.options,
            prompt: &request.prompt,
        };
        let bytes = serde_json::to_vec(&material).expect("key material serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Cached completion with retry on transient failures. Answers on the
    /// stop-list are dropped.
    pub fn complete(&self, request: &CompletionRequest) -> Result<Vec<(String, f64)>> {
        let key = self.cache_key(request);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.response);
        }
        let policy = &self.config.retry;
        let mut attempt = 0u32;
        let response = loop {
            self.requests.fetch_add(1, Ordering::SeqCst);
            match self.provider.complete(request) {
                Ok(r) => break r,
                Err(ProviderError::Transient(msg)) if attempt < policy.max_retries => {
                    (self.sleeper)(policy.backoff(attempt));
                    attempt += 1;
                    let _ = msg;
                }
                Err(ProviderError::Transient(message)) | Err(ProviderError::Fatal(message)) => {
                    return Err(LlmError::ProviderUnavailable {
                        attempts: attempt + 1,
                        message,
                    })
                }
            }
        };
        let response: Vec<(String, f64)> = response
            .into_iter()
            .filter(|(a, _)| !self.config.stop_list.iter().any(|s| s.trim() == a.trim()))
            .collect();
        self.cache.insert(CacheRecord {
            cache_key: key,
            provider_id: self.provider.id(),
            prompt: request.prompt.clone(),
            response: response.clone(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })?;
        Ok(response)
    }

    /// Completes many requests with at most `max_in_flight` concurrent
    /// provider calls. Identical requests are issued once. Output order
    /// matches input order.
    pub fn complete_many(&self, requests: &[CompletionRequest]) -> Vec<Result<Vec<(String, f64)>>> {
        let mut unique: Vec<&CompletionRequest> = Vec::new();
        let mut slot_of: HashMap<&CompletionRequest, usize> = HashMap::new();
        let slots: Vec<usize> = requests
            .iter()
            .map(|r| {
                *slot_of.entry(r).or_insert_with(|| {
                    unique.push(r);
                    unique.len() - 1
                })
            })
            .collect();

        let workers = self.config.max_in_flight.max(1).min(unique.len().max(1));
        let next = AtomicUsize::new(0);
        let results: Vec<std::sync::Mutex<Option<Result<Vec<(String, f64)>>>>> =
            unique.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= unique.len() {
                        break;
                    }
                    *results[i].lock().unwrap() = Some(self.complete(unique[i]));
                });
            }
        });
        let results: Vec<Result<Vec<(String, f64)>>> = results
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("every slot filled"))
            .collect();
        slots
            .into_iter()
            .map(|s| match &results[s] {
                Ok(v) => Ok(v.clone()),
                Err(e) => Err(clone_err(e)),
            })
            .collect()
    }
}

fn clone_err(e: &LlmError) -> LlmError {
    match e {
        LlmError::ProviderUnavailable { attempts, message } => LlmError::ProviderUnavailable {
            attempts: *attempts,
            message: message.clone(),
        },
        other => LlmError::UnparsableResponse(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::MockProvider;

    fn req(p: &str) -> CompletionRequest {
        CompletionRequest {
            prompt: p.into(),
            options: vec!["1".into()],
            top_k: 5,
        }
    }

    fn client(mock: Arc<MockProvider>, config: ProviderConfig) -> LlmClient {
        LlmClient::new(mock, config, ResponseCache::in_memory()).with_sleeper(|_| {})
    }

    #[test]
    fn retries_transient_failures() {
        let mock = Arc::new(
            MockProvider::new("t")
                .with_default(vec![("3".into(), 1.0)])
                .failing_first(2),
        );
        let c = client(mock.clone(), ProviderConfig::default());
        assert_eq!(c.complete(&req("x")).unwrap(), vec![("3".to_string(), 1.0)]);
        assert_eq!(mock.calls(), 3);
    }

    #[test]
    fn gives_up_after_max_retries() {
        let mock = Arc::new(
            MockProvider::new("t")
                .with_default(vec![("3".into(), 1.0)])
                .failing_first(100),
        );
        let mut cfg = ProviderConfig::default();
        cfg.retry.max_retries = 2;
        let slept = Arc::new(std::sync::Mutex::new(Vec::new()));
        let log = slept.clone();
        let c = LlmClient::new(mock.clone(), cfg, ResponseCache::in_memory())
            .with_sleeper(move |d| log.lock().unwrap().push(d));
        assert!(matches!(
            c.complete(&req("x")),
            Err(LlmError::ProviderUnavailable { attempts: 3, .. })
        ));
        assert_eq!(mock.calls(), 3);
        assert_eq!(
            *slept.lock().unwrap(),
            vec![Duration::from_millis(500), Duration::from_millis(1000)]
        );
    }

    #[test]
    fn stop_list_filters_answers() {
        let mock = Arc::new(MockProvider::new("t").with_default(vec![
            ("The".into(), 0.5),
            ("4".into(), 0.5),
        ]));
        let cfg = ProviderConfig {
            stop_list: vec!["The".into()],
            ..ProviderConfig::default()
        };
        let c = client(mock, cfg);
        assert_eq!(c.complete(&req("x")).unwrap(), vec![("4".to_string(), 0.5)]);
    }

    #[test]
    fn cache_key_depends_on_config() {
        let mock = Arc::new(MockProvider::new("t"));
        let a = client(mock.clone(), ProviderConfig::default());
        let b = client(
            mock,
            ProviderConfig {
                model: "other".into(),
                ..ProviderConfig::default()
            },
        );
        assert_eq!(a.cache_key(&req("x")), a.cache_key(&req("x")));
        assert_ne!(a.cache_key(&req("x")), b.cache_key(&req("x")));
        assert_ne!(a.cache_key(&req("x")), a.cache_key(&req("y")));
    }

    #[test]
    fn concurrent_batch_dedups_and_preserves_order() {
        let mock = Arc::new(
            MockProvider::new("t")
                .with_rule(["a"], vec![("1".into(), 1.0)])
                .with_rule(["b"], vec![("2".into(), 1.0)]),
        );
        let c = client(mock.clone(), ProviderConfig::default());
        let reqs: Vec<_> = ["a", "b", "a", "b", "a"].iter().map(|p| req(p)).collect();
        let out = c.complete_many(&reqs);
        let answers: Vec<String> = out.into_iter().map(|r| r.unwrap()[0].0.clone()).collect();
        assert_eq!(answers, vec!["1", "2", "1", "2", "1"]);
        assert_eq!(mock.calls(), 2);
    }
}
