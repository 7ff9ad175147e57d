//! Scene certainty: annotator-variance features, weak labels from 2-means
//! clustering, and classifiers that predict certainty from scene features.

mod classify;
mod kmeans;
mod metrics;
mod persist;
mod search;
mod variance;

use thiserror::Error;

pub use classify::{
    bagging_ensemble, balanced_class_weights, bootstrap_indices, oversample_minority,
    train_classifier, ClassWeighting, ClassifierKind, ClassifierModel, Fitted, Hyperparams,
    Member, ModelParams, Standardizer, Tree, TreeNode,
};
pub use kmeans::{kmeans_pp, weak_labels, KMeansOptions, KMeansResult, WeakLabel};
pub use metrics::{classification_metrics, ClassificationMetrics};
pub use persist::{CLASSIFIER_FORMAT, CLASSIFIER_VERSION};
pub use search::sample_hyperparams;
pub use variance::{sample_variance, score_variances, variance_features, VarianceVector};

#[derive(Debug, Error)]
pub enum UncertaintyError {
    #[error("scene `{scene_id}` has {count} annotation(s); at least 2 are needed")]
    InsufficientAnnotations { scene_id: String, count: usize },
    #[error("unknown scene `{0}`")]
    UnknownScene(String),
    #[error("need at least {k} distinct points, found {distinct}")]
    DegenerateInput { k: usize, distinct: usize },
    #[error("only one class present in the labels")]
    SingleClass,
    #[error("non-finite feature at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("labels must be 0 or 1, found {0}")]
    InvalidLabel(u8),
    #[error("{what}: expected {expected}, found {found}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("model file: {0}")]
    Format(String),
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T, E = UncertaintyError> = std::result::Result<T, E>;

/// Checks a design matrix and label vector; returns the feature count.
pub(crate) fn check_xy(x: &[Vec<f64>], y: &[u8]) -> Result<usize> {
    if x.is_empty() {
        return Err(UncertaintyError::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(UncertaintyError::ArityMismatch {
            what: "labels",
            expected: x.len(),
            found: y.len(),
        });
    }
    let p = check_x(x, None)?;
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(UncertaintyError::InvalidLabel(bad));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(UncertaintyError::SingleClass);
    }
    Ok(p)
}

pub(crate) fn check_x(x: &[Vec<f64>], expected: Option<usize>) -> Result<usize> {
    let p = expected.unwrap_or_else(|| x.first().map_or(0, Vec::len));
    for (row, r) in x.iter().enumerate() {
        if r.len() != p {
            return Err(UncertaintyError::ArityMismatch {
                what: "feature row",
                expected: p,
                found: r.len(),
            });
        }
        if let Some(column) = r.iter().position(|v| !v.is_finite()) {
            return Err(UncertaintyError::NonFiniteFeature { row, column });
        }
    }
    Ok(p)
}
