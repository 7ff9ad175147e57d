//! The conditional autoencoder and its score-only baselines.
//!
//! One network serves both directions. Under condition `c = 0` it reads LLM
//! scores plus a human explanation and reconstructs human scores (score
//! correction). Under `c = 1` it reads human scores plus a neutral
//! explanation placeholder and reconstructs the explanation (explanation
//! generation). Scores cross the network boundary on the internal scale
//! `(s − 1) / 4`.

mod config;
mod infer;
mod model;
pub mod nn;
mod noise;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{NetConfig, ScoreHead};
pub use infer::{
    correct_scores, forward, generate_explanation, predict_scores, ConditionedInput,
    GeneratedExplanation, NetOutput, DEFAULT_MIN_CONFIDENCE,
};
pub use model::{
    combined_loss, Batch, Condition, GraceModel, GraceNet, LossParts, TrainingRow,
    TrainingSummary, MODEL_FORMAT, MODEL_VERSION,
};
pub use noise::{salt_pepper, salt_pepper_with};
pub use train::{train, train_baseline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVariant {
    #[serde(rename = "GRACE")]
    Grace,
    /// GRACE with salt-and-pepper noise on the channel being reconstructed.
    #[serde(rename = "GRACE_NOISED")]
    GraceNoised,
    #[serde(rename = "AE")]
    Ae,
    #[serde(rename = "VAE")]
    Vae,
    #[serde(rename = "DAE")]
    Dae,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 5] = [
        ModelVariant::Grace,
        ModelVariant::GraceNoised,
        ModelVariant::Ae,
        ModelVariant::Vae,
        ModelVariant::Dae,
    ];

    /// Whether the variant has the explanation channel and the condition flag.
    pub fn uses_explanations(self) -> bool {
        matches!(self, ModelVariant::Grace | ModelVariant::GraceNoised)
    }

    pub fn is_variational(self) -> bool {
        self == ModelVariant::Vae
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Grace => "GRACE",
            ModelVariant::GraceNoised => "GRACE_NOISED",
            ModelVariant::Ae => "AE",
            ModelVariant::Vae => "VAE",
            ModelVariant::Dae => "DAE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("loss became non-finite at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("model has not been trained")]
    UntrainedModel,
    #[error("operation requires {required}, model is {actual}")]
    WrongVariant {
        required: &'static str,
        actual: ModelVariant,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("value {0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("model file: {0}")]
    Format(String),
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = NetError> = std::result::Result<T, E>;

/// `[1, 5]` → `[0, 1]`.
pub fn to_internal(score: f64) -> f64 {
    (score - 1.0) / 4.0
}

/// `[0, 1]` → `[1, 5]`.
pub fn from_internal(value: f64) -> f64 {
    1.0 + 4.0 * value
}
