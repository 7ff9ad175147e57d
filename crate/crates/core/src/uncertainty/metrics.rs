use serde::{Deserialize, Serialize};

use super::{Result, UncertaintyError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    /// Mean of per-class recalls.
    pub balanced_accuracy: f64,
    pub macro_f1: f64,
    pub macro_precision: f64,
}

/// Binary classification metrics, every class weighted equally.
///
/// Undefined ratios (no true or no predicted members) count as 0.
pub fn classification_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<ClassificationMetrics> {
    if y_true.is_empty() {
        return Err(UncertaintyError::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(UncertaintyError::ArityMismatch {
            what: "predictions",
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&v| v > 1) {
        return Err(UncertaintyError::InvalidLabel(bad));
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut recall, mut precision, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..=1u8 {
        let tp = y_true.iter().zip(y_pred).filter(|(&t, &p)| t == c && p == c).count();
        let actual = y_true.iter().filter(|&&t| t == c).count();
        let predicted = y_pred.iter().filter(|&&p| p == c).count();
        let (r, p) = (ratio(tp, actual), ratio(tp, predicted));
        recall += r / 2.0;
        precision += p / 2.0;
        f1 += if r + p > 0.0 { 2.0 * r * p / (r + p) / 2.0 } else { 0.0 };
    }
    Ok(ClassificationMetrics {
        balanced_accuracy: recall,
        macro_f1: f1,
        macro_precision: precision,
    })
}
