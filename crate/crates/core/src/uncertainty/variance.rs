use serde::{Deserialize, Serialize};

use super::{Result, UncertaintyError};
use crate::data::Dataset;

/// Per-action sample variance of one scene's annotator scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceVector(pub Vec<f64>);

impl VarianceVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Sample variance (divisor `len − 1`); `None` below two values.
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

pub fn score_variances(dataset: &Dataset, scene_id: &str) -> Result<VarianceVector> {
    if dataset.scene(scene_id).is_none() {
        return Err(UncertaintyError::UnknownScene(scene_id.to_string()));
    }
    let idx = dataset.annotation_indices(scene_id);
    if idx.len() < 2 {
        return Err(UncertaintyError::InsufficientAnnotations {
            scene_id: scene_id.to_string(),
            count: idx.len(),
        });
    }
    let ann = dataset.annotations();
    let out = (0..dataset.n_actions())
        .map(|a| {
            let col: Vec<f64> = idx.iter().map(|&i| ann[i].scores.as_slice()[a]).collect();
            sample_variance(&col).unwrap_or(0.0)
        })
        .collect();
    Ok(VarianceVector(out))
}

/// Variance vectors of every scene with at least two annotations, in
/// dataset scene order. Returns `(scene_ids, vectors)`.
pub fn variance_features(dataset: &Dataset) -> (Vec<String>, Vec<VarianceVector>) {
    dataset
        .scenes()
        .iter()
        .filter_map(|s| {
            score_variances(dataset, &s.scene_id)
                .ok()
                .map(|v| (s.scene_id.clone(), v))
        })
        .unzip()
}
