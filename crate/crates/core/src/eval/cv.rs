use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Result;
use crate::data::group_kfold;
use crate::seed;
use crate::uncertainty::{
    bagging_ensemble, classification_metrics, oversample_minority, sample_hyperparams,
    train_classifier, ClassificationMetrics, ClassifierKind, ClassifierModel, Hyperparams,
    UncertaintyError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NestedCvConfig {
    pub outer_folds: usize,
    pub inner_folds: usize,
    /// Randomized-search trials per outer fold.
    pub search_trials: usize,
    /// Oversample the minority class of every training split.
    pub oversample: bool,
    /// Bag this many members per fitted model; `None` fits a single model.
    pub bagging: Option<usize>,
    pub seed: u64,
}

impl Default for NestedCvConfig {
    fn default() -> Self {
        NestedCvConfig {
            outer_folds: 5,
            inner_folds: 5,
            search_trials: 25,
            oversample: true,
            bagging: None,
            seed: 0,
        }
    }
}

/// Group bookkeeping for one outer × inner combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageAudit {
    pub outer_fold: usize,
    pub inner_fold: usize,
    pub train_groups: usize,
    pub validation_groups: usize,
    pub test_groups: usize,
    /// Groups found in more than one of the three splits.
    pub shared_groups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub hyperparams: Hyperparams,
    /// Mean inner-validation balanced accuracy of the chosen trial.
    pub inner_score: f64,
    pub metrics: ClassificationMetrics,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedCvReport {
    pub kind: ClassifierKind,
    pub folds: Vec<FoldReport>,
    pub audits: Vec<LeakageAudit>,
    pub mean: ClassificationMetrics,
    pub std: ClassificationMetrics,
}

fn fit(
    hp: &Hyperparams,
    x: &[Vec<f64>],
    y: &[u8],
    cfg: &NestedCvConfig,
    seed: u64,
) -> Result<ClassifierModel, UncertaintyError> {
    let (x, y) = if cfg.oversample {
        oversample_minority(x, y, seed::derive(seed, 1))?
    } else {
        (x.to_vec(), y.to_vec())
    };
    match cfg.bagging {
        Some(n) => bagging_ensemble(hp, &x, &y, n, seed),
        None => train_classifier(hp, &x, &y, seed),
    }
}

fn select<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

fn group_set<'a, S: AsRef<str>>(groups: &'a [S], idx: &[usize]) -> HashSet<&'a str> {
    idx.iter().map(|&i| groups[i].as_ref()).collect()
}

/// Nested grouped cross-validation of one classifier kind.
///
/// Each outer fold runs a seeded randomized search scored by mean inner
/// balanced accuracy, refits the best trial on the whole outer-train split
/// and reports test metrics. Outer folds run in parallel; results do not
/// depend on scheduling.
pub fn nested_cv<S: AsRef<str> + Sync>(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[u8],
    groups: &[S],
    cfg: &NestedCvConfig,
) -> Result<NestedCvReport> {
    let outer = group_kfold(groups, cfg.outer_folds, cfg.seed)?;
    let folds: Vec<(FoldReport, Vec<LeakageAudit>)> = outer
        .par_iter()
        .enumerate()
        .map(|(k, (train, test))| outer_fold(kind, x, y, groups, cfg, k, train, test))
        .collect::<Result<_>>()?;
    let (folds, audits): (Vec<FoldReport>, Vec<Vec<LeakageAudit>>) = folds.into_iter().unzip();
    let stat = |f: fn(&ClassificationMetrics) -> f64| {
        let v: Vec<f64> = folds.iter().map(|r| f(&r.metrics)).collect();
        super::regression::mean_std(&v)
    };
    let (ba, f1, pr) = (
        stat(|m| m.balanced_accuracy),
        stat(|m| m.macro_f1),
        stat(|m| m.macro_precision),
    );
    Ok(NestedCvReport {
        kind,
        folds,
        audits: audits.into_iter().flatten().collect(),
        mean: ClassificationMetrics {
            balanced_accuracy: ba.0,
            macro_f1: f1.0,
            macro_precision: pr.0,
        },
        std: ClassificationMetrics {
            balanced_accuracy: ba.1,
            macro_f1: f1.1,
            macro_precision: pr.1,
        },
    })
}

impl NestedCvReport {
    /// Hyperparameters of the outer fold with the best inner score; ties go
    /// to the earlier fold.
    pub fn selected(&self) -> Option<&FoldReport> {
        self.folds
            .iter()
            .fold(None, |best: Option<&FoldReport>, f| match best {
                Some(b) if b.inner_score >= f.inner_score => Some(b),
                _ => Some(f),
            })
    }
}

/// Refits the selected hyperparameters on all rows for deployment.
pub fn fit_selected(
    report: &NestedCvReport,
    x: &[Vec<f64>],
    y: &[u8],
    cfg: &NestedCvConfig,
) -> Result<ClassifierModel> {
    let hp = &report.selected().ok_or(super::EvalError::EmptyInput)?.hyperparams;
    Ok(fit(hp, x, y, cfg, seed::derive(cfg.seed, 0))?)
}

#[allow(clippy::too_many_arguments)]
fn outer_fold<S: AsRef<str>>(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[u8],
    groups: &[S],
    cfg: &NestedCvConfig,
    k: usize,
    train: &[usize],
    test: &[usize],
) -> Result<(FoldReport, Vec<LeakageAudit>)> {
    let fold_seed = seed::derive(cfg.seed, 1 + k as u64);
    let go: Vec<&str> = train.iter().map(|&i| groups[i].as_ref()).collect();
    let (xo, yo) = (select(x, train), select(y, train));
    let inner = group_kfold(&go, cfg.inner_folds, seed::derive(fold_seed, 0))?;
    let test_groups = group_set(groups, test);
    let audits = inner
        .iter()
        .enumerate()
        .map(|(j, (itr, iva))| {
            let (a, b) = (group_set(&go, itr), group_set(&go, iva));
            let shared = a.intersection(&b).count()
                + a.intersection(&test_groups).count()
                + b.intersection(&test_groups).count();
            LeakageAudit {
                outer_fold: k,
                inner_fold: j,
                train_groups: a.len(),
                validation_groups: b.len(),
                test_groups: test_groups.len(),
                shared_groups: shared,
            }
        })
        .collect();

    let mut search_rng = seed::sub_rng(fold_seed, 1);
    let mut best: Option<(f64, Hyperparams)> = None;
    for t in 0..cfg.search_trials.max(1) {
        let hp = sample_hyperparams(kind, &mut search_rng);
        let mut scores = Vec::new();
        for (j, (itr, iva)) in inner.iter().enumerate() {
            let s = seed::derive(fold_seed, 100 + (t * cfg.inner_folds + j) as u64);
            let model = match fit(&hp, &select(&xo, itr), &select(&yo, itr), cfg, s) {
                Ok(m) => m,
                Err(UncertaintyError::SingleClass) => continue,
                Err(e) => return Err(e.into()),
            };
            let pred = model.predict(&select(&xo, iva))?;
            scores.push(classification_metrics(&select(&yo, iva), &pred)?.balanced_accuracy);
        }
        if scores.is_empty() {
            continue;
        }
        let score = scores.iter().sum::<f64>() / scores.len() as f64;
        if best.as_ref().map_or(true, |b| score > b.0) {
            best = Some((score, hp));
        }
    }
    let (inner_score, hyperparams) = best.ok_or(UncertaintyError::SingleClass)?;
    let model = fit(&hyperparams, &xo, &yo, cfg, seed::derive(fold_seed, 2))?;
    let pred = model.predict(&select(x, test))?;
    let metrics = classification_metrics(&select(y, test), &pred)?;
    Ok((
        FoldReport {
            fold: k,
            hyperparams,
            inner_score,
            metrics,
            n_train: train.len(),
            n_test: test.len(),
        },
        audits,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Scenes whose label is decided by the sign of feature 0.
    fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>, Vec<String>) {
        let mut rng = seed::rng(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = u8::from(i % 3 == 0);
            let f0 = if c == 1 { rng.random_range(1.0..3.0) } else { rng.random_range(-3.0..-1.0) };
            x.push(vec![f0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            y.push(c);
        }
        let g = (0..n).map(|i| format!("scene_{i}")).collect();
        (x, y, g)
    }

    #[test]
    fn separable_data_no_leakage_and_deterministic() {
        let (x, y, g) = separable(90, 1);
        let cfg = NestedCvConfig {
            search_trials: 4,
            ..NestedCvConfig::default()
        };
        let a = nested_cv(ClassifierKind::Lr, &x, &y, &g, &cfg).unwrap();
        assert_eq!(a.audits.len(), 25);
        assert!(a.audits.iter().all(|r| r.shared_groups == 0));
        assert!(a.mean.balanced_accuracy > 0.95);
        let b = nested_cv(ClassifierKind::Lr, &x, &y, &g, &cfg).unwrap();
        assert_eq!(a, b);
        let m = fit_selected(&a, &x, &y, &cfg).unwrap();
        let pred = m.predict(&x).unwrap();
        assert!(classification_metrics(&y, &pred).unwrap().balanced_accuracy > 0.95);
    }

    #[test]
    fn grouped_rows_stay_together() {
        let (x, y, _) = separable(60, 2);
        let g: Vec<String> = (0..60).map(|i| format!("scene_{}", i / 3)).collect();
        let cfg = NestedCvConfig {
            search_trials: 2,
            ..NestedCvConfig::default()
        };
        let r = nested_cv(ClassifierKind::Knn, &x, &y, &g, &cfg).unwrap();
        assert!(r.audits.iter().all(|a| a.shared_groups == 0));
    }

    #[test]
    fn too_few_groups() {
        let (x, y, _) = separable(8, 3);
        let g = vec!["a", "a", "b", "b", "c", "c", "d", "d"];
        assert!(matches!(
            nested_cv(ClassifierKind::Lr, &x, &y, &g, &NestedCvConfig::default()),
            Err(crate::eval::EvalError::Data(crate::data::DataError::TooFewGroups { .. }))
        ));
    }
}
