//! Two-shot labeling of free-text explanations into the seven categories.

use serde::{Deserialize, Serialize};

use super::client::{CompletionRequest, LlmClient};
use super::{LlmError, Result};
use crate::data::{ExplanationCategory, ExplanationVector};

/// One pole of a category: its label and a worked exemplar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub label: String,
    pub exemplar: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryPrompt {
    pub category: ExplanationCategory,
    /// Stored as `+1`.
    pub positive: PoleSpec,
    /// Stored as `-1`.
    pub negative: PoleSpec,
}

/// Pole assignment and few-shot exemplars for every category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelingConfig {
    pub categories: Vec<CategoryPrompt>,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        use ExplanationCategory::*;
        let ex = |c: ExplanationCategory, pos: &str, neg: &str| CategoryPrompt {
            category: c,
            positive: PoleSpec {
                label: c.positive_pole().into(),
                exemplar: pos.into(),
            },
            negative: PoleSpec {
                label: c.negative_pole().into(),
                exemplar: neg.into(),
            },
        };
        LabelingConfig {
            categories: vec![
                ex(
                    HumanState,
                    "Everyone is just relaxing, so they have time for the robot.",
                    "The people are busy working and should not be interrupted.",
                ),
                ex(
                    Safety,
                    "Nothing can be knocked over, it is safe to do this.",
                    "The robot could trip someone or spill hot food on them.",
                ),
                ex(
                    RobotDirection,
                    "The robot is looking at the group so it can talk to them.",
                    "The robot faces away from the people.",
                ),
                ex(
                    WorkingArea,
                    "There is plenty of open floor space to work in.",
                    "The room is cramped and there is little space to move.",
                ),
                ex(
                    RobotCapability,
                    "A robot like this can easily carry a drink.",
                    "This robot is too small to carry large objects.",
                ),
                ex(
                    RobotProximity,
                    "The robot is far away from everyone, so it will not disturb them.",
                    "The robot is standing right next to the person.",
                ),
                ex(
                    Crowd,
                    "The room is full of people.",
                    "The room is empty apart from one person.",
                ),
            ],
        }
    }
}

impl LabelingConfig {
    pub fn prompt_for(&self, category: ExplanationCategory) -> Option<&CategoryPrompt> {
        self.categories.iter().find(|c| c.category == category)
    }
}

/// Two-shot prompt for one category.
pub fn labeling_prompt(spec: &CategoryPrompt, text: &str) -> String {
    let name = spec.category.slug().replace('_', " ");
    format!(
        "Classify the explanation with respect to {name}. Answer 1 if it says \"{pos}\", \
         -1 if it says \"{neg}\", and 0 if it says neither.\n\n\
         Explanation: {pos_ex}\nAnswer: 1\n\n\
         Explanation: {neg_ex}\nAnswer: -1\n\n\
         Explanation: {text}\nAnswer:",
        pos = spec.positive.label,
        neg = spec.negative.label,
        pos_ex = spec.positive.exemplar,
        neg_ex = spec.negative.exemplar,
        text = text.trim(),
    )
}

/// Strict answer parser: `1`, `+1`, `-1`, `0`, a pole label, or `neutral`.
pub fn parse_label(answer: &str, spec: &CategoryPrompt) -> Option<i8> {
    let a = answer.trim().trim_end_matches('.').to_ascii_lowercase();
    match a.as_str() {
        "1" | "+1" => Some(1),
        "-1" => Some(-1),
        "0" | "neutral" | "none" => Some(0),
        _ if a == spec.positive.label.to_ascii_lowercase() => Some(1),
        _ if a == spec.negative.label.to_ascii_lowercase() => Some(-1),
        _ => None,
    }
}

/// Labels one explanation for one category. Empty text is neutral (0)
/// without a provider call.
pub fn label_explanation(
    client: &LlmClient,
    config: &LabelingConfig,
    text: &str,
    category: ExplanationCategory,
) -> Result<i8> {
    if text.trim().is_empty() {
        return Ok(0);
    }
    let spec = config.prompt_for(category).ok_or_else(|| {
        LlmError::UnparsableResponse(format!("no labeling prompt for category {category}"))
    })?;
    let answers = client.complete(&CompletionRequest {
        prompt: labeling_prompt(spec, text),
        options: vec!["1".into(), "-1".into(), "0".into()],
        top_k: 1,
    })?;
    let top = answers
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| LlmError::UnparsableResponse("empty response".into()))?;
    parse_label(&top.0, spec).ok_or_else(|| LlmError::UnparsableResponse(top.0.clone()))
}

/// Labels every category; any failure yields `None` so the annotation is
/// left out of explanation-bearing subsets.
pub fn label_annotation(
    client: &LlmClient,
    config: &LabelingConfig,
    text: &str,
) -> Result<Option<ExplanationVector>> {
    if text.trim().is_empty() {
        return Ok(None);
    }
    let mut raw = [0i8; ExplanationCategory::COUNT];
    for (slot, c) in raw.iter_mut().zip(ExplanationCategory::ALL) {
        match label_explanation(client, config, text, c) {
            Ok(v) => *slot = v,
            Err(LlmError::UnparsableResponse(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    normalize_explanation(&raw).map(Some)
}

/// Maps raw labels `-1 → 0.0`, `0 → 0.5`, `1 → 1.0`.
pub fn normalize_explanation(raw: &[i8]) -> Result<ExplanationVector> {
    if raw.len() != ExplanationCategory::COUNT {
        return Err(LlmError::ArityMismatch(format!(
            "expected {} labels, got {}",
            ExplanationCategory::COUNT,
            raw.len()
        )));
    }
    let mut out = [0.5; ExplanationCategory::COUNT];
    for (o, &r) in out.iter_mut().zip(raw) {
        if !(-1..=1).contains(&r) {
            return Err(LlmError::OutOfDomain(r as i64));
        }
        *o = (r as f64 + 1.0) / 2.0;
    }
    Ok(ExplanationVector::new(out).expect("levels are exact"))
}

/// Inverse of [`normalize_explanation`].
pub fn denormalize_explanation(e: &ExplanationVector) -> [i8; ExplanationCategory::COUNT] {
    let mut out = [0i8; ExplanationCategory::COUNT];
    for (o, &v) in out.iter_mut().zip(e.as_slice()) {
        *o = (v * 2.0 - 1.0).round() as i8;
    }
    out
}

/// Fraction of category cells on which two label sets agree.
pub fn label_agreement<R: AsRef<[i8]>>(manual: &[R], auto: &[R]) -> Result<f64> {
    if manual.len() != auto.len() {
        return Err(LlmError::ArityMismatch(format!(
            "{} manual rows vs {} automatic rows",
            manual.len(),
            auto.len()
        )));
    }
    let mut cells = 0usize;
    let mut same = 0usize;
    for (i, (m, a)) in manual.iter().zip(auto).enumerate() {
        let (m, a) = (m.as_ref(), a.as_ref());
        if m.len() != a.len() {
            return Err(LlmError::ArityMismatch(format!(
                "row {i}: {} vs {} categories",
                m.len(),
                a.len()
            )));
        }
        cells += m.len();
        same += m.iter().zip(a).filter(|(x, y)| x == y).count();
    }
    if cells == 0 {
        return Err(LlmError::EmptyInput);
    }
    Ok(same as f64 / cells as f64)
}
