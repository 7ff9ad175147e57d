use serde::{Deserialize, Serialize};

use super::{EvalError, Result};

/// How correlations treat the action dimension.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// One coefficient over all records × actions.
    #[default]
    Flattened,
    /// Coefficient per action, then averaged over actions.
    PerActionMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub rmse: f64,
    pub rmse_std: f64,
    pub pcc: f64,
    pub ccc: f64,
    pub n_samples: usize,
}

fn check(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<usize> {
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if pred.len() != truth.len() {
        return Err(EvalError::ArityMismatch {
            what: "records",
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let n = truth[0].len();
    for (p, t) in pred.iter().zip(truth) {
        if p.len() != t.len() || t.len() != n || n == 0 {
            return Err(EvalError::ArityMismatch {
                what: "actions",
                expected: n,
                found: p.len(),
            });
        }
    }
    Ok(n)
}

/// Per-record RMSE over actions, then mean and population std over records.
pub fn rmse(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<(f64, f64)> {
    check(pred, truth)?;
    let per: Vec<f64> = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| {
            (p.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / p.len() as f64).sqrt()
        })
        .collect();
    Ok(mean_std(&per))
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

struct Moments {
    mx: f64,
    my: f64,
    vx: f64,
    vy: f64,
    cov: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments> {
    if x.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(EvalError::ArityMismatch {
            what: "series",
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
        cov += (a - mx) * (b - my);
    }
    let (vx, vy, cov) = (vx / n, vy / n, cov / n);
    if vx == 0.0 || vy == 0.0 {
        return Err(EvalError::ConstantSeries);
    }
    Ok(Moments { mx, my, vx, vy, cov })
}

/// Pearson correlation with population moments.
pub fn pcc(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = moments(x, y)?;
    Ok((m.cov / (m.vx.sqrt() * m.vy.sqrt())).clamp(-1.0, 1.0))
}

/// Lin's concordance correlation coefficient with population moments.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = moments(x, y)?;
    Ok(2.0 * m.cov / (m.vx + m.vy + (m.mx - m.my).powi(2)))
}

fn correlation(
    f: fn(&[f64], &[f64]) -> Result<f64>,
    pred: &[Vec<f64>],
    truth: &[Vec<f64>],
    mode: CorrelationMode,
) -> Result<f64> {
    match mode {
        CorrelationMode::Flattened => {
            let p: Vec<f64> = pred.iter().flatten().copied().collect();
            let t: Vec<f64> = truth.iter().flatten().copied().collect();
            f(&p, &t)
        }
        CorrelationMode::PerActionMean => {
            let n = truth[0].len();
            let mut sum = 0.0;
            for a in 0..n {
                let p: Vec<f64> = pred.iter().map(|r| r[a]).collect();
                let t: Vec<f64> = truth.iter().map(|r| r[a]).collect();
                sum += f(&p, &t)?;
            }
            Ok(sum / n as f64)
        }
    }
}

pub fn regression_report(pred: &[Vec<f64>], truth: &[Vec<f64>], mode: CorrelationMode) -> Result<RegressionReport> {
    let (rmse, rmse_std) = rmse(pred, truth)?;
    Ok(RegressionReport {
        rmse,
        rmse_std,
        pcc: correlation(pcc, pred, truth, mode)?,
        ccc: correlation(ccc, pred, truth, mode)?,
        n_samples: pred.len(),
    })
}

/// Whole-dataset, uncertain-cluster and certain-cluster reports (`WD`,
/// `UC`, `CC`); `uncertain[i]` flags record `i`. Clusters without records
/// are omitted.
pub fn cluster_reports(
    pred: &[Vec<f64>],
    truth: &[Vec<f64>],
    uncertain: &[bool],
    mode: CorrelationMode,
) -> Result<Vec<(&'static str, RegressionReport)>> {
    if uncertain.len() != pred.len() {
        return Err(EvalError::ArityMismatch {
            what: "cluster flags",
            expected: pred.len(),
            found: uncertain.len(),
        });
    }
    let mut out = vec![("WD", regression_report(pred, truth, mode)?)];
    for (name, flag) in [("UC", true), ("CC", false)] {
        let idx: Vec<usize> = (0..pred.len()).filter(|&i| uncertain[i] == flag).collect();
        if idx.is_empty() {
            continue;
        }
        let p: Vec<Vec<f64>> = idx.iter().map(|&i| pred[i].clone()).collect();
        let t: Vec<Vec<f64>> = idx.iter().map(|&i| truth[i].clone()).collect();
        out.push((name, regression_report(&p, &t, mode)?));
    }
    Ok(out)
}
