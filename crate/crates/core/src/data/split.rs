//! Group-aware splitting: every annotation of a scene lands in the same split.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, Result};
use crate::seed;

/// Annotation (or row) indices for one fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Distinct groups in first-appearance order, and each row's group number.
fn group_ids<S: AsRef<str>>(groups: &[S]) -> (usize, Vec<usize>) {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let row_group = groups
        .iter()
        .map(|g| {
            let next = ids.len();
            *ids.entry(g.as_ref()).or_insert(next)
        })
        .collect();
    (ids.len(), row_group)
}

/// Shuffled group order, deterministic under `seed`.
fn shuffled_groups(n_groups: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_groups).collect();
    order.shuffle(&mut seed::rng(seed));
    order
}

/// Grouped K-fold: returns `(train, test)` row indices per fold.
///
/// Groups are shuffled with `seed` and dealt round-robin into folds, so fold
/// sizes differ by at most one group.
pub fn group_kfold<S: AsRef<str>>(
    groups: &[S],
    folds: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(DataError::InvalidFolds(folds));
    }
    if groups.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let (n_groups, row_group) = group_ids(groups);
    if n_groups < folds {
        return Err(DataError::TooFewGroups {
            groups: n_groups,
            folds,
        });
    }
    let mut fold_of_group = vec![0usize; n_groups];
    for (pos, g) in shuffled_groups(n_groups, seed).into_iter().enumerate() {
        fold_of_group[g] = pos % folds;
    }
    Ok((0..folds)
        .map(|k| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..groups.len()).partition(|&i| fold_of_group[row_group[i]] == k);
            (train, test)
        })
        .collect())
}

/// Grouped train/validation/test partitions for each of `folds` folds.
///
/// Fold `k` tests on the k-th group fold. The remaining groups are shuffled
/// and `ceil(remaining / folds)` of them become the validation split; the
/// rest train. Every split is non-empty or the call fails with
/// [`DataError::TooFewGroups`].
pub fn group_split_by<S: AsRef<str>>(
    groups: &[S],
    folds: usize,
    seed: u64,
) -> Result<Vec<SplitIndices>> {
    let base = group_kfold(groups, folds, seed)?;
    let (n_groups, row_group) = group_ids(groups);
    let mut out = Vec::with_capacity(folds);
    for (k, (rest, test)) in base.into_iter().enumerate() {
        let mut rest_groups: Vec<usize> = Vec::new();
        let mut seen = vec![false; n_groups];
        for &i in &rest {
            let g = row_group[i];
            if !seen[g] {
                seen[g] = true;
                rest_groups.push(g);
            }
        }
        rest_groups.shuffle(&mut seed::sub_rng(seed, 1 + k as u64));
        let n_val = rest_groups.len().div_ceil(folds).max(1);
        if n_val >= rest_groups.len() {
            return Err(DataError::TooFewGroups {
                groups: n_groups,
                folds,
            });
        }
        let mut is_val = vec![false; n_groups];
        for &g in &rest_groups[..n_val] {
            is_val[g] = true;
        }
        let (validation, train): (Vec<usize>, Vec<usize>) =
            rest.into_iter().partition(|&i| is_val[row_group[i]]);
        out.push(SplitIndices {
            train,
            validation,
            test,
        });
    }
    Ok(out)
}

/// Grouped splits over a dataset's annotations, grouped by scene.
pub fn group_split(dataset: &Dataset, folds: usize, seed: u64) -> Result<Vec<SplitIndices>> {
    group_split_by(&dataset.annotation_groups(), folds, seed)
}
