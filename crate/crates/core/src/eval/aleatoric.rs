use super::regression::mean_std;
use super::{EvalError, Result};
use crate::data::Dataset;
use crate::uncertainty::{score_variances, UncertaintyError};

/// Added to every variance before the logarithm.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Mean over actions of `ln(σ² + floor)` for one scene.
pub fn scene_log_variance(variances: &[f64]) -> f64 {
    variances.iter().map(|v| (v + VARIANCE_FLOOR).ln()).sum::<f64>() / variances.len() as f64
}

/// Mean and population std of per-scene log variances.
pub fn aleatoric_uncertainty<S: AsRef<str>>(dataset: &Dataset, scene_ids: &[S]) -> Result<(f64, f64)> {
    if scene_ids.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let per = scene_ids
        .iter()
        .map(|id| {
            score_variances(dataset, id.as_ref())
                .map(|v| scene_log_variance(v.as_slice()))
                .map_err(|e| match e {
                    UncertaintyError::InsufficientAnnotations { scene_id, count } => {
                        EvalError::InsufficientAnnotations { scene_id, count }
                    }
                    other => other.into(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_std(&per))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_variance_fixtures() {
        assert!(scene_log_variance(&[1.0, 1.0, 1.0]).abs() < 1e-5);
        let e = std::f64::consts::E;
        assert!((scene_log_variance(&[e, e]) - 1.0).abs() < 1e-6);
        assert!((scene_log_variance(&[0.0]) - VARIANCE_FLOOR.ln()).abs() < 1e-12);
    }

    #[test]
    fn dataset_level() {
        use crate::data::{synthesize_dataset, SynthSpec};
        let (d, truth) = synthesize_dataset(&SynthSpec::two_regime(40, 6, 0.1, 1.5), 3).unwrap();
        let pick = |regime: usize| -> Vec<&String> {
            truth
                .scene_ids
                .iter()
                .zip(&truth.regimes)
                .filter(|(_, &r)| r == regime)
                .map(|(id, _)| id)
                .collect()
        };
        let (low, high) = (pick(0), pick(1));
        let (ml, _) = aleatoric_uncertainty(&d, &low).unwrap();
        let (mh, _) = aleatoric_uncertainty(&d, &high).unwrap();
        assert!(ml < mh);
        let (d1, t1) = synthesize_dataset(&SynthSpec::two_regime(3, 1, 0.1, 1.0), 1).unwrap();
        assert!(matches!(
            aleatoric_uncertainty(&d1, &t1.scene_ids),
            Err(EvalError::InsufficientAnnotations { .. })
        ));
    }
}
