//! Synthetic datasets with known generative parameters, used as test oracles.
//!
//! Generative rule per annotation:
//!
//! ```text
//! S_human = clamp(S_LLM + W · (E_human − 0.5) + N(0, σ_regime), 1, 5)
//! ```
//!
//! `S_LLM` is a per-scene function of the scene attributes, `W` is an
//! `n × 7` matrix, and `σ_regime` depends on the scene's variance regime.
//! Regimes whose explanations are shared draw one explanation per scene,
//! so annotators of that scene only disagree through noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    AnnotationRecord, DataError, Dataset, ExplanationCategory, ExplanationVector, Result,
    RobotType, SceneRecord, ScoreVector,
};
use crate::seed;

/// One variance regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    /// Relative frequency (ignored when a regime feature decides membership).
    pub proportion: f64,
    /// Standard deviation of the additive score noise.
    pub noise_std: f64,
    /// All annotators of a scene share one explanation.
    pub shared_explanation: bool,
}

/// How explanations relate to scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplanationMode {
    /// Explanations are drawn first and shift scores through `W`.
    Independent,
    /// `category` is 1 when action `low_action` scores below `high_action`
    /// and 0 otherwise; the two actions are placed `gap` apart around 3.
    /// The category has no `W` effect.
    ScoreDriven {
        category: usize,
        low_action: usize,
        high_action: usize,
        gap: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_actions: usize,
    pub n_features: usize,
    pub n_scenes: usize,
    pub annotators_per_scene: usize,
    /// `W` entries are uniform in `[-explanation_scale, explanation_scale]`.
    pub explanation_scale: f64,
    pub regimes: Vec<Regime>,
    /// When set, binary attribute `i` decides the regime (0 → regime 0, 1 → regime 1).
    pub regime_feature: Option<usize>,
    pub explanation_mode: ExplanationMode,
    /// Round human scores to the nearest integer level.
    pub integer_scores: bool,
}

impl SynthSpec {
    /// Two regimes keyed on attribute 0: a shared-explanation low-noise regime
    /// and an independent-explanation regime.
    pub fn explanation_benefit(n_scenes: usize, annotators_per_scene: usize) -> Self {
        SynthSpec {
            n_actions: 9,
            n_features: 12,
            n_scenes,
            annotators_per_scene,
            explanation_scale: 1.2,
            regimes: vec![
                Regime {
                    proportion: 0.5,
                    noise_std: 0.1,
                    shared_explanation: true,
                },
                Regime {
                    proportion: 0.5,
                    noise_std: 0.1,
                    shared_explanation: false,
                },
            ],
            regime_feature: Some(0),
            explanation_mode: ExplanationMode::Independent,
            integer_scores: false,
        }
    }

    /// Two noise regimes, no explanation effect.
    pub fn two_regime(n_scenes: usize, annotators_per_scene: usize, low: f64, high: f64) -> Self {
        SynthSpec {
            n_actions: 9,
            n_features: 12,
            n_scenes,
            annotators_per_scene,
            explanation_scale: 0.0,
            regimes: vec![
                Regime {
                    proportion: 0.6,
                    noise_std: low,
                    shared_explanation: true,
                },
                Regime {
                    proportion: 0.4,
                    noise_std: high,
                    shared_explanation: true,
                },
            ],
            regime_feature: Some(0),
            explanation_mode: ExplanationMode::Independent,
            integer_scores: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DataError::InvalidSpec(m.to_string()));
        if self.n_actions == 0 || self.n_features == 0 {
            return bad("n_actions and n_features must be positive");
        }
        if self.n_scenes == 0 || self.annotators_per_scene == 0 {
            return bad("n_scenes and annotators_per_scene must be positive");
        }
        if !self.explanation_scale.is_finite() || self.explanation_scale < 0.0 {
            return bad("explanation_scale must be finite and non-negative");
        }
        if self.regimes.is_empty() {
            return bad("at least one regime is required");
        }
        for r in &self.regimes {
            if !(r.proportion > 0.0 && r.proportion.is_finite()) {
                return bad("regime proportions must be positive");
            }
            if !(r.noise_std >= 0.0 && r.noise_std.is_finite()) {
                return bad("regime noise_std must be finite and non-negative");
            }
        }
        if let Some(f) = self.regime_feature {
            if f >= self.n_features {
                return bad("regime_feature out of range");
            }
            if self.regimes.len() != 2 {
                return bad("regime_feature requires exactly two regimes");
            }
        }
        if let ExplanationMode::ScoreDriven {
            category,
            low_action,
            high_action,
            gap,
        } = self.explanation_mode
        {
            if category >= ExplanationCategory::COUNT {
                return bad("score-driven category out of range");
            }
            if low_action >= self.n_actions || high_action >= self.n_actions {
                return bad("score-driven action out of range");
            }
            if low_action == high_action {
                return bad("score-driven actions must differ");
            }
            if !(gap > 0.0 && gap <= 4.0) {
                return bad("score-driven gap must be in (0, 4]");
            }
        }
        Ok(())
    }
}

/// Ground truth returned alongside a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub spec: SynthSpec,
    pub seed: u64,
    /// Scene ids, aligned with the other per-scene fields.
    pub scene_ids: Vec<String>,
    /// LLM-style expected scores per scene.
    pub llm_scores: Vec<Vec<f64>>,
    /// Regime index per scene.
    pub regimes: Vec<usize>,
    /// `n × 7` explanation effect matrix, row-major.
    pub weights: Vec<Vec<f64>>,
}

/// Generates a dataset and the parameters that produced it.
pub fn synthesize_dataset(spec: &SynthSpec, seed: u64) -> Result<(Dataset, SynthTruth)> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let n = spec.n_actions;
    let p = spec.n_features;
    let m = ExplanationCategory::COUNT;

    let driven = match spec.explanation_mode {
        ExplanationMode::ScoreDriven { category, .. } => Some(category),
        ExplanationMode::Independent => None,
    };
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|j| {
                    if Some(j) == driven || spec.explanation_scale == 0.0 {
                        0.0
                    } else {
                        rng.random_range(-spec.explanation_scale..=spec.explanation_scale)
                    }
                })
                .collect()
        })
        .collect();
    // Attribute → LLM score map.
    let coef_scale = 1.5 / (p as f64).sqrt();
    let llm_coef: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-coef_scale..=coef_scale)).collect())
        .collect();
    let llm_bias: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();

    let total: f64 = spec.regimes.iter().map(|r| r.proportion).sum();
    let feature_names: Vec<String> = (0..p).map(|i| format!("attr_{i:02}")).collect();
    let action_names: Vec<String> = (0..n).map(|i| format!("action_{i}")).collect();
    let robots = [RobotType::Pepper, RobotType::Pr2, RobotType::Nao];

    let mut scenes = Vec::with_capacity(spec.n_scenes);
    let mut annotations = Vec::with_capacity(spec.n_scenes * spec.annotators_per_scene);
    let mut truth_llm = Vec::with_capacity(spec.n_scenes);
    let mut truth_regime = Vec::with_capacity(spec.n_scenes);

    for s in 0..spec.n_scenes {
        let scene_id = format!("scene_{s:05}");
        let mut features: Vec<f64> = (0..p)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        let regime = match spec.regime_feature {
            Some(f) => {
                let mut r = 0;
                let u: f64 = rng.random();
                if u < spec.regimes[1].proportion / total {
                    r = 1;
                }
                features[f] = r as f64;
                r
            }
            None => {
                let mut u: f64 = rng.random::<f64>() * total;
                let mut r = spec.regimes.len() - 1;
                for (i, reg) in spec.regimes.iter().enumerate() {
                    if u < reg.proportion {
                        r = i;
                        break;
                    }
                    u -= reg.proportion;
                }
                r
            }
        };
        let llm: Vec<f64> = (0..n)
            .map(|a| {
                let z: f64 = llm_coef[a]
                    .iter()
                    .zip(&features)
                    .map(|(c, f)| c * (f - 0.5))
                    .sum::<f64>()
                    + llm_bias[a];
                1.5 + 3.0 / (1.0 + (-z).exp())
            })
            .collect();
        let reg = &spec.regimes[regime];
        let noise = Normal::new(0.0, reg.noise_std.max(0.0))
            .map_err(|e| DataError::InvalidSpec(e.to_string()))?;
        let shared = random_explanation(&mut rng);

        for a in 0..spec.annotators_per_scene {
            let mut expl = if reg.shared_explanation {
                shared
            } else {
                random_explanation(&mut rng)
            };
            let mut scores: Vec<f64> = (0..n)
                .map(|i| {
                    let shift: f64 = weights[i]
                        .iter()
                        .zip(&expl)
                        .map(|(w, e)| w * (e - 0.5))
                        .sum();
                    let eps = if reg.noise_std > 0.0 {
                        noise.sample(&mut rng)
                    } else {
                        0.0
                    };
                    llm[i] + shift + eps
                })
                .collect();
            if let ExplanationMode::ScoreDriven {
                category,
                low_action,
                high_action,
                gap,
            } = spec.explanation_mode
            {
                let ordered = if reg.shared_explanation {
                    shared[category] == 1.0 || (shared[category] == 0.5 && s % 2 == 0)
                } else {
                    rng.random_bool(0.5)
                };
                let jitter = if reg.noise_std > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                let (lo, hi) = (3.0 - gap / 2.0 + jitter, 3.0 + gap / 2.0 + jitter);
                if ordered {
                    scores[low_action] = lo;
                    scores[high_action] = hi;
                    expl[category] = 1.0;
                } else {
                    scores[low_action] = hi;
                    scores[high_action] = lo;
                    expl[category] = 0.0;
                }
            }
            let scores: Vec<f64> = scores
                .into_iter()
                .map(|v| {
                    let v = v.clamp(1.0, 5.0);
                    if spec.integer_scores {
                        v.round()
                    } else {
                        v
                    }
                })
                .collect();
            let explanation = ExplanationVector::new(expl)?;
            annotations.push(AnnotationRecord {
                scene_id: scene_id.clone(),
                annotator_id: format!("annotator_{a:03}"),
                scores: ScoreVector::new(scores)?,
                explanation_text: explanation_text(&explanation),
                explanation: Some(explanation),
            });
        }
        scenes.push(SceneRecord {
            scene_id,
            robot_type: robots[rng.random_range(0..robots.len())],
            features,
        });
        truth_llm.push(llm);
        truth_regime.push(regime);
    }

    let scene_ids = scenes.iter().map(|s| s.scene_id.clone()).collect();
    let dataset = Dataset::new(scenes, annotations, action_names, feature_names)?;
    Ok((
        dataset,
        SynthTruth {
            spec: spec.clone(),
            seed,
            scene_ids,
            llm_scores: truth_llm,
            regimes: truth_regime,
            weights,
        },
    ))
}

fn random_explanation(rng: &mut impl Rng) -> [f64; ExplanationCategory::COUNT] {
    let mut e = [0.5; ExplanationCategory::COUNT];
    for v in &mut e {
        *v = [0.0, 0.5, 1.0][rng.random_range(0..3)];
    }
    e
}

/// Renders the non-neutral poles as a short phrase list.
fn explanation_text(e: &ExplanationVector) -> String {
    let parts: Vec<&str> = ExplanationCategory::ALL
        .iter()
        .filter_map(|&c| match e.get(c) {
            v if v == 1.0 => Some(c.positive_pole()),
            v if v == 0.0 => Some(c.negative_pole()),
            _ => None,
        })
        .collect();
    if parts.is_empty() {
        "no particular reason".to_string()
    } else {
        parts.join("; ")
    }
}
