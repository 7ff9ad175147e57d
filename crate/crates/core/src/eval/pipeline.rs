use serde::{Deserialize, Serialize};

use super::{EvalError, Result};
use crate::data::ExplanationVector;
use crate::net::{correct_scores, generate_explanation, GeneratedExplanation, GraceModel};
use crate::uncertainty::ClassifierModel;

/// Models and policy for routing one scene.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub classifier: Option<ClassifierModel>,
    pub grace: Option<GraceModel>,
    /// Explanations returned for human-scored scenes.
    pub top_r: usize,
}

/// What is known about one scene. `llm_scores` are the expected LLM scores
/// per action (see `llm::scene_expected_scores`).
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInput<'a> {
    pub features: &'a [f64],
    pub llm_scores: &'a [f64],
    pub explanation: Option<&'a ExplanationVector>,
    pub human_scores: Option<&'a [f64]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum RoutedOutput {
    /// Annotators are expected to agree: LLM scores as they are.
    Certain { scores: Vec<f64> },
    /// Uncertain scene corrected with the human explanation.
    Corrected { scores: Vec<f64> },
    /// Uncertain scene with human scores: generated explanation.
    Explained { explanations: Vec<GeneratedExplanation> },
    /// Uncertain, but neither an explanation nor scores are available.
    Unresolved { scores: Vec<f64> },
}

impl RoutedOutput {
    pub fn route(&self) -> &'static str {
        match self {
            RoutedOutput::Certain { .. } => "certain",
            RoutedOutput::Corrected { .. } => "corrected",
            RoutedOutput::Explained { .. } => "explained",
            RoutedOutput::Unresolved { .. } => "unresolved",
        }
    }
}

pub fn run_pipeline(config: &PipelineConfig, input: &PipelineInput<'_>) -> Result<RoutedOutput> {
    let classifier = config
        .classifier
        .as_ref()
        .ok_or(EvalError::ModelMissing("certainty classifier"))?;
    let uncertain = classifier.predict(&[input.features.to_vec()])?[0] == 1;
    if !uncertain {
        return Ok(RoutedOutput::Certain {
            scores: input.llm_scores.to_vec(),
        });
    }
    if input.explanation.is_none() && input.human_scores.is_none() {
        return Ok(RoutedOutput::Unresolved {
            scores: input.llm_scores.to_vec(),
        });
    }
    let grace = config.grace.as_ref().ok_or(EvalError::ModelMissing("GRACE"))?;
    if let Some(e) = input.explanation {
        let out = correct_scores(grace, &[(input.llm_scores, e.as_slice())])?;
        return Ok(RoutedOutput::Corrected {
            scores: out[0].as_slice().to_vec(),
        });
    }
    let scores = input.human_scores.expect("checked above");
    let mut out = generate_explanation(grace, &[scores], config.top_r)?;
    Ok(RoutedOutput::Explained {
        explanations: out.remove(0),
    })
}
