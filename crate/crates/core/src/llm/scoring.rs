use serde::{Deserialize, Serialize};

use super::client::{CompletionRequest, LlmClient};
use super::prompt::{describe_scene, SceneTemplate};
use super::{LlmError, Result};
use crate::data::SceneRecord;

/// Verbal labels of the five levels, lowest first.
pub const SCORE_LABELS: [&str; 5] = [
    "very inappropriate",
    "inappropriate",
    "neutral",
    "appropriate",
    "very appropriate",
];

/// Candidate answers offered to the provider for a scoring prompt.
pub fn scene_prompt_options() -> Vec<String> {
    (1..=5).map(|s| s.to_string()).collect()
}

/// Distinct appropriateness levels with their (unnormalized) probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredOptions {
    entries: Vec<(u8, f64)>,
}

impl ScoredOptions {
    pub fn new(entries: Vec<(u8, f64)>) -> Result<Self> {
        let mut seen = [false; 6];
        for &(s, p) in &entries {
            if !(1..=5).contains(&s) || seen[s as usize] || !(p >= 0.0 && p.is_finite()) {
                return Err(LlmError::InvalidOptions);
            }
            seen[s as usize] = true;
        }
        if entries.is_empty() {
            return Err(LlmError::InvalidOptions);
        }
        Ok(ScoredOptions { entries })
    }

    /// Parses raw provider answers. Unmappable answers are dropped and
    /// repeated levels have their probabilities summed.
    pub fn from_answers(answers: &[(String, f64)]) -> Result<Self> {
        let mut mass = [0.0f64; 6];
        let mut present = [false; 6];
        let mut order = Vec::new();
        for (a, p) in answers {
            if let Some(s) = parse_score(a) {
                if !present[s as usize] {
                    present[s as usize] = true;
                    order.push(s);
                }
                mass[s as usize] += p.max(0.0);
            }
        }
        if order.is_empty() {
            let raw: Vec<&str> = answers.iter().map(|(a, _)| a.as_str()).collect();
            return Err(LlmError::UnparsableResponse(format!("{raw:?}")));
        }
        ScoredOptions::new(order.into_iter().map(|s| (s, mass[s as usize])).collect())
    }

    pub fn entries(&self) -> &[(u8, f64)] {
        &self.entries
    }
}

/// Maps an answer string to a level: a bare digit 1–5 (optionally followed
/// by punctuation or a label) or one of [`SCORE_LABELS`].
pub fn parse_score(answer: &str) -> Option<u8> {
    let t = answer.trim().trim_matches(|c: char| c == '"' || c == '\'');
    if let Some(d) = t.chars().next().and_then(|c| c.to_digit(10)) {
        let rest = &t[1..];
        let digit_follows = |r: &str| r.starts_with(|n: char| n.is_ascii_digit());
        let multi_digit = digit_follows(rest) || (rest.starts_with('.') && digit_follows(&rest[1..]));
        return ((1..=5).contains(&d) && !multi_digit).then_some(d as u8);
    }
    let norm = t
        .trim_end_matches(['.', '!'])
        .to_ascii_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    SCORE_LABELS
        .iter()
        .position(|l| *l == norm)
        .map(|i| i as u8 + 1)
}

/// Probability-weighted mean level, renormalized over the returned options.
pub fn expected_score(options: &ScoredOptions) -> Result<f64> {
    let total: f64 = options.entries.iter().map(|(_, p)| p).sum();
    if total <= 0.0 {
        return Err(LlmError::ZeroMass);
    }
    Ok(options
        .entries
        .iter()
        .map(|&(s, p)| s as f64 * (p / total))
        .sum())
}

/// Queries the top-k appropriateness levels for one scene/action pair.
pub fn query_action_score(
    client: &LlmClient,
    template: &SceneTemplate,
    scene: &SceneRecord,
    feature_names: &[String],
    action: &str,
) -> Result<ScoredOptions> {
    let prompt = describe_scene(template, scene, feature_names, action)?;
    let answers = client.complete(&CompletionRequest {
        prompt,
        options: scene_prompt_options(),
        top_k: client.config().top_k,
    })?;
    ScoredOptions::from_answers(&answers)
}

/// Expected scores for every action of a scene; requests run concurrently
/// through the client's in-flight bound.
pub fn scene_expected_scores(
    client: &LlmClient,
    template: &SceneTemplate,
    scene: &SceneRecord,
    feature_names: &[String],
    actions: &[String],
) -> Result<Vec<f64>> {
    let requests = actions
        .iter()
        .map(|a| {
            Ok(CompletionRequest {
                prompt: describe_scene(template, scene, feature_names, a)?,
                options: scene_prompt_options(),
                top_k: client.config().top_k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    client
        .complete_many(&requests)
        .into_iter()
        .map(|r| expected_score(&ScoredOptions::from_answers(&r?)?))
        .collect()
}
