use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::model::{Batch, Condition, GraceModel};
use super::{from_internal, to_internal, NetError, Result};
use crate::data::{ExplanationCategory, ScoreVector};

/// Generated explanations below this confidence are treated as neutral.
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.55;

/// One network input on the raw score scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionedInput {
    pub condition: Condition,
    pub scores: Vec<f64>,
    /// Human explanation under score correction, the all-0.5 vector under
    /// explanation generation. Empty for score-only variants.
    pub explanation: Vec<f64>,
}

impl ConditionedInput {
    pub fn score_correction(s_llm: &[f64], e_human: &[f64]) -> Self {
        ConditionedInput {
            condition: Condition::ScoreCorrection,
            scores: s_llm.to_vec(),
            explanation: e_human.to_vec(),
        }
    }

    pub fn explanation_generation(s_human: &[f64], m: usize) -> Self {
        ConditionedInput {
            condition: Condition::ExplanationGeneration,
            scores: s_human.to_vec(),
            explanation: vec![0.5; m],
        }
    }

    pub fn scores_only(scores: &[f64]) -> Self {
        ConditionedInput {
            condition: Condition::ScoreCorrection,
            scores: scores.to_vec(),
            explanation: Vec::new(),
        }
    }
}

/// Network output: scores mapped back to `[1, 5]` and explanation
/// probabilities (empty for score-only variants).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetOutput {
    pub scores: Vec<f64>,
    pub explanation: Vec<f64>,
}

fn input_batch(model: &GraceModel, inputs: &[ConditionedInput]) -> Result<Batch> {
    let cfg = model.config();
    let variant = model.variant();
    let b = inputs.len();
    let mut cond = Array2::zeros((b, 1));
    let mut scores = Array2::zeros((b, cfg.n));
    let mut expl = Array2::from_elem((b, cfg.m), 0.5);
    for (i, inp) in inputs.iter().enumerate() {
        if inp.scores.len() != cfg.n {
            return Err(NetError::ShapeMismatch {
                what: "score input".into(),
                expected: cfg.n,
                found: inp.scores.len(),
            });
        }
        for (j, &v) in inp.scores.iter().enumerate() {
            scores[(i, j)] = to_internal(v);
        }
        if variant.uses_explanations() {
            if inp.explanation.len() != cfg.m {
                return Err(NetError::ShapeMismatch {
                    what: "explanation input".into(),
                    expected: cfg.m,
                    found: inp.explanation.len(),
                });
            }
            cond[(i, 0)] = inp.condition.flag();
            for (j, &v) in inp.explanation.iter().enumerate() {
                expl[(i, j)] = v;
            }
        }
    }
    Ok(Batch {
        cond,
        target_scores: scores.clone(),
        target_expl: expl.clone(),
        scores,
        expl,
        eps: variant
            .is_variational()
            .then(|| Array2::zeros((b, cfg.latent_dim))),
    })
}

/// Deterministic forward pass over many inputs (the variational variant
/// decodes its posterior mean).
pub fn forward(model: &GraceModel, inputs: &[ConditionedInput]) -> Result<Vec<NetOutput>> {
    if inputs.is_empty() {
        return Ok(Vec::new());
    }
    let batch = input_batch(model, inputs)?;
    let (s, e) = model.net.predict(&batch)?;
    Ok((0..inputs.len())
        .map(|i| NetOutput {
            scores: s.row(i).iter().map(|&v| from_internal(v)).collect(),
            explanation: e.as_ref().map(|e| e.row(i).to_vec()).unwrap_or_default(),
        })
        .collect())
}

fn require_trained(model: &GraceModel) -> Result<()> {
    if model.is_trained() {
        Ok(())
    } else {
        Err(NetError::UntrainedModel)
    }
}

fn require_grace(model: &GraceModel) -> Result<()> {
    if model.variant().uses_explanations() {
        Ok(())
    } else {
        Err(NetError::WrongVariant {
            required: "GRACE or GRACE_NOISED",
            actual: model.variant(),
        })
    }
}

/// Corrects LLM scores given the human explanation (`c = 0`); one result
/// per `(S_LLM, E_human)` pair, clamped to `[1, 5]`.
pub fn correct_scores(model: &GraceModel, rows: &[(&[f64], &[f64])]) -> Result<Vec<ScoreVector>> {
    require_trained(model)?;
    require_grace(model)?;
    let inputs: Vec<_> = rows
        .iter()
        .map(|(s, e)| ConditionedInput::score_correction(s, e))
        .collect();
    Ok(forward(model, &inputs)?
        .into_iter()
        .map(|o| ScoreVector::clamped(o.scores))
        .collect())
}

/// Score reconstruction for the score-only baselines.
pub fn predict_scores(model: &GraceModel, rows: &[&[f64]]) -> Result<Vec<ScoreVector>> {
    require_trained(model)?;
    if model.variant().uses_explanations() {
        return Err(NetError::WrongVariant {
            required: "AE, VAE or DAE",
            actual: model.variant(),
        });
    }
    let inputs: Vec<_> = rows.iter().map(|s| ConditionedInput::scores_only(s)).collect();
    Ok(forward(model, &inputs)?
        .into_iter()
        .map(|o| ScoreVector::clamped(o.scores))
        .collect())
}

/// A ranked explanation component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedExplanation {
    pub category: ExplanationCategory,
    /// Pole phrase, e.g. "safe" or "safety concerns".
    pub component: String,
    pub positive: bool,
    /// Raw network output for the category.
    pub probability: f64,
    /// `max(p, 1 − p)`.
    pub confidence: f64,
}

impl fmt::Display for GeneratedExplanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p: {:.2})", self.component, self.confidence)
    }
}

fn rank(probs: &[f64], top_r: usize, min_confidence: f64) -> Vec<GeneratedExplanation> {
    let mut out: Vec<GeneratedExplanation> = probs
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| {
            let category = ExplanationCategory::from_index(i)?;
            let positive = p >= 0.5;
            let confidence = p.max(1.0 - p);
            (confidence >= min_confidence).then(|| GeneratedExplanation {
                category,
                component: if positive {
                    category.positive_pole()
                } else {
                    category.negative_pole()
                }
                .to_string(),
                positive,
                probability: p,
                confidence,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.category.index().cmp(&b.category.index()))
    });
    out.truncate(top_r);
    out
}

/// Explains human scores (`c = 1`, neutral explanation input): categories
/// ranked by confidence, near-neutral ones dropped, at most `top_r`.
pub fn generate_explanation(
    model: &GraceModel,
    rows: &[&[f64]],
    top_r: usize,
) -> Result<Vec<Vec<GeneratedExplanation>>> {
    require_trained(model)?;
    require_grace(model)?;
    let m = model.config().m;
    let inputs: Vec<_> = rows
        .iter()
        .map(|s| ConditionedInput::explanation_generation(s, m))
        .collect();
    Ok(forward(model, &inputs)?
        .into_iter()
        .map(|o| rank(&o.explanation, top_r, DEFAULT_MIN_CONFIDENCE))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{GraceNet, ModelVariant, NetConfig};
    use crate::seed;
    use proptest::prelude::*;

    fn cfg() -> NetConfig {
        NetConfig {
            n: 4,
            branch_dim: 8,
            shared_dims: vec![16, 8],
            latent_dim: 4,
            ..NetConfig::default()
        }
    }

    #[test]
    fn zero_network_outputs_midpoint_and_no_explanation() {
        let m = GraceModel::zeroed(ModelVariant::Grace, &cfg()).unwrap();
        let s = [1.0, 2.0, 5.0, 4.0];
        let e = [0.0, 0.5, 1.0, 0.5, 0.5, 1.0, 0.0];
        let out = forward(&m, &[ConditionedInput::score_correction(&s, &e)]).unwrap();
        assert!(out[0].scores.iter().all(|&v| v == 3.0));
        assert!(out[0].explanation.iter().all(|&v| v == 0.5));
        assert!(generate_explanation(&m, &[&s], 3).unwrap()[0].is_empty());
        assert_eq!(correct_scores(&m, &[(&s, &e)]).unwrap()[0].as_slice(), &[3.0; 4]);
    }

    #[test]
    fn untrained_and_wrong_variant_rejected() {
        let net = GraceNet::init(ModelVariant::Grace, &cfg(), &mut seed::rng(1)).unwrap();
        let m = GraceModel::new(net, None);
        let s = [3.0; 4];
        assert!(matches!(generate_explanation(&m, &[&s], 3), Err(NetError::UntrainedModel)));
        let ae = GraceModel::zeroed(ModelVariant::Ae, &cfg()).unwrap();
        assert!(matches!(
            correct_scores(&ae, &[(&s, &[0.5; 7])]),
            Err(NetError::WrongVariant { .. })
        ));
        assert_eq!(predict_scores(&ae, &[&s]).unwrap()[0].as_slice(), &[3.0; 4]);
    }

    #[test]
    fn ranking_and_display() {
        let probs = [0.5, 0.18, 0.6, 0.95, 0.52, 0.3, 0.1];
        let r = rank(&probs, 3, DEFAULT_MIN_CONFIDENCE);
        let cats: Vec<usize> = r.iter().map(|g| g.category.index()).collect();
        assert_eq!(cats, vec![3, 6, 1]);
        assert!(!r[2].positive);
        let safe = rank(&[0.5, 0.82, 0.5, 0.5, 0.5, 0.5, 0.5], 3, DEFAULT_MIN_CONFIDENCE);
        assert_eq!(safe[0].to_string(), "safe (p: 0.82)");
    }

    #[test]
    fn shape_mismatch() {
        let m = GraceModel::zeroed(ModelVariant::Grace, &cfg()).unwrap();
        assert!(matches!(
            forward(&m, &[ConditionedInput::score_correction(&[3.0; 3], &[0.5; 7])]),
            Err(NetError::ShapeMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn outputs_stay_in_range(seed in any::<u64>(), s in prop::collection::vec(1.0f64..=5.0, 4), e in prop::collection::vec(prop::sample::select(vec![0.0, 0.5, 1.0]), 7)) {
            let net = GraceNet::init(ModelVariant::Grace, &cfg(), &mut seed::rng(seed)).unwrap();
            let m = GraceModel::new(net, Some(crate::net::TrainingSummary::untrained()));
            let out = forward(&m, &[ConditionedInput::score_correction(&s, &e)]).unwrap();
            prop_assert!(out[0].explanation.iter().all(|p| (0.0..=1.0).contains(p)));
            let c = correct_scores(&m, &[(&s, &e)]).unwrap();
            prop_assert!(c[0].as_slice().iter().all(|v| (1.0..=5.0).contains(v)));
            let a = forward(&m, &[ConditionedInput::score_correction(&s, &e)]).unwrap();
            prop_assert_eq!(out, a);
        }
    }
}
