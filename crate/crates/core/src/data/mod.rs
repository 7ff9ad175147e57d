//! Typed dataset model: scenes, per-annotator scores and explanations.

mod io;
mod split;
mod synth;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_dataset, write_dataset, ANNOTATIONS_FILE, LABELS_FILE, SCENES_FILE};
pub use split::{group_kfold, group_split, group_split_by, SplitIndices};
pub use synth::{synthesize_dataset, ExplanationMode, Regime, SynthSpec, SynthTruth};

/// Lowest appropriateness level on the annotation scale.
pub const SCORE_MIN: f64 = 1.0;
/// Highest appropriateness level on the annotation scale.
pub const SCORE_MAX: f64 = 5.0;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file} line {line}: score {value} in column `{column}` is outside [1, 5]")]
    ScoreOutOfRange {
        file: String,
        line: u64,
        column: String,
        value: f64,
    },
    #[error("{file} line {line}: scene `{scene_id}` does not exist")]
    DanglingSceneReference {
        file: String,
        line: u64,
        scene_id: String,
    },
    #[error("{context}: expected {expected} values, found {found}")]
    WrongFeatureArity {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("{file} line {line}: cannot parse `{value}` in column `{column}`")]
    InvalidNumber {
        file: String,
        line: u64,
        column: String,
        value: String,
    },
    #[error("{file} line {line}: unknown robot type `{value}`")]
    UnknownRobotType { file: String, line: u64, value: String },
    #[error("scene `{scene_id}`: robot one-hot columns sum to {sum}, expected 1")]
    RobotOneHot { scene_id: String, sum: f64 },
    #[error("{file} line {line}: duplicate scene `{scene_id}`")]
    DuplicateScene {
        file: String,
        line: u64,
        scene_id: String,
    },
    #[error("{file} line {line}: explanation label {value} not in {{-1, 0, 1}}")]
    LabelOutOfDomain { file: String, line: u64, value: f64 },
    #[error("{file} line {line}: label row for ({scene_id}, {annotator_id}) has no matching annotation")]
    UnmatchedLabel {
        file: String,
        line: u64,
        scene_id: String,
        annotator_id: String,
    },
    #[error("explanation value {0} not in {{0, 0.5, 1}}")]
    InvalidExplanation(f64),
    #[error("score {0} is outside [1, 5]")]
    InvalidScore(f64),
    #[error("{groups} distinct scenes cannot fill {folds} folds")]
    TooFewGroups { groups: usize, folds: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFolds(usize),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("dataset is empty")]
    EmptyDataset,
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RobotType {
    Pepper,
    #[serde(rename = "PR2")]
    Pr2,
    Nao,
    Other,
}

impl RobotType {
    pub const ALL: [RobotType; 4] = [
        RobotType::Pepper,
        RobotType::Pr2,
        RobotType::Nao,
        RobotType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RobotType::Pepper => "Pepper",
            RobotType::Pr2 => "PR2",
            RobotType::Nao => "Nao",
            RobotType::Other => "Other",
        }
    }
}

impl fmt::Display for RobotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RobotType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pepper" => Ok(RobotType::Pepper),
            "pr2" => Ok(RobotType::Pr2),
            "nao" => Ok(RobotType::Nao),
            "other" => Ok(RobotType::Other),
            _ => Err(s.to_string()),
        }
    }
}

/// One virtual scene and its descriptive attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene_id: String,
    pub robot_type: RobotType,
    pub features: Vec<f64>,
}

/// Appropriateness scores for the dataset's actions, each in `[1, 5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = scores
            .iter()
            .find(|s| !(SCORE_MIN..=SCORE_MAX).contains(*s))
        {
            return Err(DataError::InvalidScore(bad));
        }
        Ok(ScoreVector(scores))
    }

    /// Clamps every entry into `[1, 5]`. NaN becomes the scale midpoint.
    pub fn clamped(scores: impl IntoIterator<Item = f64>) -> Self {
        ScoreVector(
            scores
                .into_iter()
                .map(|s| {
                    if s.is_nan() {
                        3.0
                    } else {
                        s.clamp(SCORE_MIN, SCORE_MAX)
                    }
                })
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ScoreVector {
    type Error = DataError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ScoreVector::new(v)
    }
}

impl From<ScoreVector> for Vec<f64> {
    fn from(s: ScoreVector) -> Self {
        s.0
    }
}

/// The seven retained explanation axes, in canonical storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationCategory {
    HumanState,
    Safety,
    RobotDirection,
    WorkingArea,
    RobotCapability,
    RobotProximity,
    Crowd,
}

impl ExplanationCategory {
    pub const COUNT: usize = 7;

    pub const ALL: [ExplanationCategory; 7] = [
        ExplanationCategory::HumanState,
        ExplanationCategory::Safety,
        ExplanationCategory::RobotDirection,
        ExplanationCategory::WorkingArea,
        ExplanationCategory::RobotCapability,
        ExplanationCategory::RobotProximity,
        ExplanationCategory::Crowd,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn slug(self) -> &'static str {
        match self {
            ExplanationCategory::HumanState => "human_state",
            ExplanationCategory::Safety => "safety",
            ExplanationCategory::RobotDirection => "robot_direction",
            ExplanationCategory::WorkingArea => "working_area",
            ExplanationCategory::RobotCapability => "robot_capability",
            ExplanationCategory::RobotProximity => "robot_proximity",
            ExplanationCategory::Crowd => "crowd",
        }
    }

    pub fn from_slug(slug: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.slug() == slug)
    }

    /// Short phrase for the component stored as `+1` (normalized `1.0`).
    ///
    /// Pole assignment: only human state (available = +1) and proximity
    /// (far = 1.0) are pinned by the source material; the rest follow the
    /// first-listed component.
    pub fn positive_pole(self) -> &'static str {
        match self {
            ExplanationCategory::HumanState => "people available",
            ExplanationCategory::Safety => "safe",
            ExplanationCategory::RobotDirection => "robot facing people",
            ExplanationCategory::WorkingArea => "big working area",
            ExplanationCategory::RobotCapability => "robot capable",
            ExplanationCategory::RobotProximity => "robot far from others",
            ExplanationCategory::Crowd => "scene crowded",
        }
    }

    /// Short phrase for the component stored as `-1` (normalized `0.0`).
    pub fn negative_pole(self) -> &'static str {
        match self {
            ExplanationCategory::HumanState => "people busy",
            ExplanationCategory::Safety => "safety concerns",
            ExplanationCategory::RobotDirection => "robot not facing people",
            ExplanationCategory::WorkingArea => "small working area",
            ExplanationCategory::RobotCapability => "robot incapable",
            ExplanationCategory::RobotProximity => "robot close",
            ExplanationCategory::Crowd => "scene not crowded",
        }
    }
}

impl fmt::Display for ExplanationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// Normalized explanation: one value in `{0, 0.5, 1}` per category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExplanationVector([f64; ExplanationCategory::COUNT]);

impl ExplanationVector {
    pub fn new(values: [f64; ExplanationCategory::COUNT]) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !is_explanation_level(**v)) {
            return Err(DataError::InvalidExplanation(bad));
        }
        Ok(ExplanationVector(values))
    }

    /// The all-neutral vector used as the placeholder explanation.
    pub fn neutral() -> Self {
        ExplanationVector([0.5; ExplanationCategory::COUNT])
    }

    pub fn get(&self, category: ExplanationCategory) -> f64 {
        self.0[category.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn values(&self) -> [f64; ExplanationCategory::COUNT] {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ExplanationVector {
    type Error = DataError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let arr: [f64; ExplanationCategory::COUNT] =
            v.as_slice()
                .try_into()
                .map_err(|_| DataError::WrongFeatureArity {
                    context: "explanation vector".into(),
                    expected: ExplanationCategory::COUNT,
                    found: v.len(),
                })?;
        ExplanationVector::new(arr)
    }
}

impl From<ExplanationVector> for Vec<f64> {
    fn from(e: ExplanationVector) -> Self {
        e.0.to_vec()
    }
}

fn is_explanation_level(v: f64) -> bool {
    v == 0.0 || v == 0.5 || v == 1.0
}

/// One annotator's scores and explanation for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub scene_id: String,
    pub annotator_id: String,
    pub scores: ScoreVector,
    pub explanation_text: String,
    pub explanation: Option<ExplanationVector>,
}

/// Declared shape of a dataset. `None` means "take it from the header".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub action_count: Option<usize>,
    pub feature_count: Option<usize>,
}

impl DatasetSchema {
    /// Eight actions, 29 scene attributes.
    pub fn mannersdb() -> Self {
        DatasetSchema {
            action_count: Some(8),
            feature_count: Some(29),
        }
    }

    /// Nine actions, 32 scene attributes (29 plus a three-way robot one-hot).
    pub fn mannersdb_plus() -> Self {
        DatasetSchema {
            action_count: Some(9),
            feature_count: Some(32),
        }
    }
}

/// Immutable, validated collection of scenes and their annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    scenes: Vec<SceneRecord>,
    annotations: Vec<AnnotationRecord>,
    action_names: Vec<String>,
    feature_names: Vec<String>,
    scene_index: HashMap<String, usize>,
    by_scene: Vec<Vec<usize>>,
}

impl Dataset {
    /// Validates referential integrity and arities.
    ///
    /// Scenes without any annotation are dropped.
    pub fn new(
        scenes: Vec<SceneRecord>,
        annotations: Vec<AnnotationRecord>,
        action_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let mut scene_index = HashMap::with_capacity(scenes.len());
        for (i, s) in scenes.iter().enumerate() {
            if s.features.len() != feature_names.len() {
                return Err(DataError::WrongFeatureArity {
                    context: format!("scene `{}`", s.scene_id),
                    expected: feature_names.len(),
                    found: s.features.len(),
                });
            }
            check_robot_one_hot(s, &feature_names)?;
            if scene_index.insert(s.scene_id.clone(), i).is_some() {
                return Err(DataError::DuplicateScene {
                    file: "<memory>".into(),
                    line: i as u64 + 1,
                    scene_id: s.scene_id.clone(),
                });
            }
        }
        let mut counts = vec![0usize; scenes.len()];
        for (i, a) in annotations.iter().enumerate() {
            let Some(&si) = scene_index.get(&a.scene_id) else {
                return Err(DataError::DanglingSceneReference {
                    file: "<memory>".into(),
                    line: i as u64 + 1,
                    scene_id: a.scene_id.clone(),
                });
            };
            if a.scores.len() != action_names.len() {
                return Err(DataError::WrongFeatureArity {
                    context: format!("annotation {} scores", i),
                    expected: action_names.len(),
                    found: a.scores.len(),
                });
            }
            counts[si] += 1;
        }
        let scenes: Vec<SceneRecord> = scenes
            .into_iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, _)| s)
            .collect();
        let scene_index: HashMap<String, usize> = scenes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.scene_id.clone(), i))
            .collect();
        let mut by_scene = vec![Vec::new(); scenes.len()];
        for (i, a) in annotations.iter().enumerate() {
            by_scene[scene_index[&a.scene_id]].push(i);
        }
        Ok(Dataset {
            scenes,
            annotations,
            action_names,
            feature_names,
            scene_index,
            by_scene,
        })
    }

    pub fn scenes(&self) -> &[SceneRecord] {
        &self.scenes
    }

    pub fn annotations(&self) -> &[AnnotationRecord] {
        &self.annotations
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn scene(&self, scene_id: &str) -> Option<&SceneRecord> {
        self.scene_index.get(scene_id).map(|&i| &self.scenes[i])
    }

    /// Indices into [`Dataset::annotations`] for one scene, in file order.
    pub fn annotation_indices(&self, scene_id: &str) -> &[usize] {
        self.scene_index
            .get(scene_id)
            .map(|&i| self.by_scene[i].as_slice())
            .unwrap_or(&[])
    }

    /// Scene id of every annotation, aligned with [`Dataset::annotations`].
    pub fn annotation_groups(&self) -> Vec<String> {
        self.annotations.iter().map(|a| a.scene_id.clone()).collect()
    }

    /// Annotations that carry a resolved explanation vector.
    pub fn explained_indices(&self) -> Vec<usize> {
        self.annotations
            .iter()
            .enumerate()
            .filter(|(_, a)| a.explanation.is_some())
            .map(|(i, _)| i)
            .collect()
    }

    /// Replaces explanation vectors, aligned with annotations.
    pub fn with_explanations(mut self, explanations: Vec<Option<ExplanationVector>>) -> Self {
        assert_eq!(explanations.len(), self.annotations.len());
        for (a, e) in self.annotations.iter_mut().zip(explanations) {
            a.explanation = e;
        }
        self
    }
}

/// Feature names of the form `robot_<type>` are treated as a one-hot block.
fn check_robot_one_hot(scene: &SceneRecord, feature_names: &[String]) -> Result<()> {
    let mut present = false;
    let mut sum = 0.0;
    for (name, v) in feature_names.iter().zip(&scene.features) {
        if name.starts_with("robot_") {
            present = true;
            sum += v;
        }
    }
    if present && sum != 1.0 {
        return Err(DataError::RobotOneHot {
            scene_id: scene.scene_id.clone(),
            sum,
        });
    }
    Ok(())
}

/// Lowercases and replaces anything outside `[a-z0-9]` with `_`.
pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut last_us = false;
    for ch in name.trim().chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
            last_us = false;
        } else if !last_us && !out.is_empty() {
            out.push('_');
            last_us = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(id: &str, features: Vec<f64>) -> SceneRecord {
        SceneRecord {
            scene_id: id.into(),
            robot_type: RobotType::Pepper,
            features,
        }
    }

    fn ann(scene: &str, who: &str, scores: Vec<f64>) -> AnnotationRecord {
        AnnotationRecord {
            scene_id: scene.into(),
            annotator_id: who.into(),
            scores: ScoreVector::new(scores).unwrap(),
            explanation_text: String::new(),
            explanation: None,
        }
    }

    #[test]
    fn score_vector_bounds() {
        assert!(ScoreVector::new(vec![1.0, 5.0, 3.3]).is_ok());
        assert!(matches!(
            ScoreVector::new(vec![6.0]),
            Err(DataError::InvalidScore(v)) if v == 6.0
        ));
        assert!(ScoreVector::new(vec![0.99]).is_err());
        assert_eq!(
            ScoreVector::clamped([0.0, 7.0, f64::NAN]).as_slice(),
            &[1.0, 5.0, 3.0]
        );
    }

    #[test]
    fn explanation_levels() {
        assert!(ExplanationVector::new([0.0, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5]).is_ok());
        assert!(ExplanationVector::new([0.2, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(ExplanationVector::try_from(vec![0.5; 6]).is_err());
    }

    #[test]
    fn dangling_reference_rejected() {
        let err = Dataset::new(
            vec![scene("a", vec![0.0])],
            vec![ann("b", "x", vec![3.0])],
            vec!["act".into()],
            vec!["f".into()],
        )
        .unwrap_err();
        assert!(matches!(err, DataError::DanglingSceneReference { .. }));
    }

    #[test]
    fn unannotated_scenes_dropped() {
        let ds = Dataset::new(
            vec![scene("a", vec![0.0]), scene("b", vec![1.0])],
            vec![ann("a", "x", vec![3.0]), ann("a", "y", vec![4.0])],
            vec!["act".into()],
            vec!["f".into()],
        )
        .unwrap();
        assert_eq!(ds.scenes().len(), 1);
        assert_eq!(ds.annotation_indices("a"), &[0, 1]);
        assert!(ds.annotation_indices("b").is_empty());
    }

    #[test]
    fn robot_one_hot_checked() {
        let names = vec!["robot_pepper".to_string(), "robot_nao".to_string()];
        let bad = Dataset::new(
            vec![scene("a", vec![1.0, 1.0])],
            vec![ann("a", "x", vec![3.0])],
            vec!["act".into()],
            names.clone(),
        );
        assert!(matches!(bad, Err(DataError::RobotOneHot { .. })));
        let good = Dataset::new(
            vec![scene("a", vec![0.0, 1.0])],
            vec![ann("a", "x", vec![3.0])],
            vec!["act".into()],
            names,
        );
        assert!(good.is_ok());
    }

    #[test]
    fn slugs() {
        assert_eq!(slugify("Carrying warm food"), "carrying_warm_food");
        assert_eq!(slugify("  Music-playing? "), "music_playing");
        for c in ExplanationCategory::ALL {
            assert_eq!(ExplanationCategory::from_slug(c.slug()), Some(c));
            assert_eq!(ExplanationCategory::from_index(c.index()), Some(c));
        }
    }
}
