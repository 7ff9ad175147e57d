//! LLM score elicitation and explanation labeling.
//!
//! Providers return the top-k candidate answers with probabilities. Scores
//! are the probability-weighted mean of the parsed appropriateness levels.
//! Every completion goes through [`LlmClient`], which adds retries with
//! exponential backoff and a content-addressed, append-only response cache.

mod cache;
mod client;
#[cfg(feature = "http")]
mod http;
mod labeling;
mod prompt;
mod provider;
mod scoring;

use thiserror::Error;

pub use cache::{CacheRecord, ResponseCache};
pub use client::{CompletionRequest, LlmClient};
#[cfg(feature = "http")]
pub use http::OpenAiCompatibleProvider;
pub use labeling::{
    denormalize_explanation, label_agreement, label_annotation, label_explanation,
    labeling_prompt, normalize_explanation, parse_label, CategoryPrompt, LabelingConfig, PoleSpec,
};
pub use prompt::{describe_scene, humanize, FeatureClause, SceneTemplate};
pub use provider::{
    prompt_hash, LlmProvider, MockFixture, MockProvider, MockRule, ProviderConfig, ProviderError,
    RetryPolicy,
};
pub use scoring::{
    expected_score, parse_score, query_action_score, scene_expected_scores, scene_prompt_options,
    ScoredOptions,
    SCORE_LABELS,
};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("provider unavailable after {attempts} attempt(s): {message}")]
    ProviderUnavailable { attempts: u32, message: String },
    #[error("no answer could be mapped: {0}")]
    UnparsableResponse(String),
    #[error("all option probabilities are zero")]
    ZeroMass,
    #[error("options must be non-empty with distinct scores in 1..=5 and non-negative probabilities")]
    InvalidOptions,
    #[error("label value {0} outside {{-1, 0, 1}}")]
    OutOfDomain(i64),
    #[error("scene has {found} features but the template names {expected}")]
    UnknownFeature { expected: usize, found: usize },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("empty input")]
    EmptyInput,
    #[error("cache {path}: {message}")]
    Cache { path: String, message: String },
}

pub type Result<T, E = LlmError> = std::result::Result<T, E>;
