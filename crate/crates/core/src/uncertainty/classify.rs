use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_x, check_xy, Result, UncertaintyError};
use crate::net::nn::{relu_backward, relu_inplace, sigmoid, Adam, AdamParams, Dense, LayerRecord};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "MLP")]
    Mlp,
    #[serde(rename = "RF")]
    Rf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Lr,
        ClassifierKind::Knn,
        ClassifierKind::Mlp,
        ClassifierKind::Rf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Lr => "LR",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Mlp => "MLP",
            ClassifierKind::Rf => "RF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeighting {
    None,
    /// `N / (2 · N_c)` per class.
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelParams {
    #[serde(rename = "LR")]
    Logistic { l2: f64, max_iter: usize, tol: f64 },
    #[serde(rename = "KNN")]
    Knn { k: usize },
    #[serde(rename = "MLP")]
    Mlp {
        hidden: Vec<usize>,
        lr: f64,
        epochs: usize,
        batch_size: usize,
        l2: f64,
    },
    #[serde(rename = "RF")]
    Forest {
        n_trees: usize,
        max_depth: usize,
        min_samples_split: usize,
        /// Features tried per split; `None` means `ceil(sqrt(p))`.
        max_features: Option<usize>,
    },
}

impl ModelParams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ModelParams::Logistic { .. } => ClassifierKind::Lr,
            ModelParams::Knn { .. } => ClassifierKind::Knn,
            ModelParams::Mlp { .. } => ClassifierKind::Mlp,
            ModelParams::Forest { .. } => ClassifierKind::Rf,
        }
    }

    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Lr => ModelParams::Logistic {
                l2: 1e-2,
                max_iter: 2000,
                tol: 1e-6,
            },
            ClassifierKind::Knn => ModelParams::Knn { k: 5 },
            ClassifierKind::Mlp => ModelParams::Mlp {
                hidden: vec![32],
                lr: 3e-3,
                epochs: 100,
                batch_size: 32,
                l2: 1e-4,
            },
            ClassifierKind::Rf => ModelParams::Forest {
                n_trees: 50,
                max_depth: 8,
                min_samples_split: 2,
                max_features: None,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(UncertaintyError::InvalidHyperparams(m.to_string()));
        match self {
            ModelParams::Logistic { l2, tol, .. } if !(*l2 >= 0.0 && *tol > 0.0) => {
                bad("LR needs l2 ≥ 0 and tol > 0")
            }
            ModelParams::Knn { k: 0 } => bad("KNN needs k ≥ 1"),
            ModelParams::Mlp {
                hidden,
                lr,
                batch_size,
                l2,
                ..
            } if hidden.contains(&0) || !(*lr > 0.0) || *batch_size == 0 || !(*l2 >= 0.0) => {
                bad("MLP needs positive widths, lr and batch size")
            }
            ModelParams::Forest {
                n_trees,
                max_depth,
                max_features,
                ..
            } if *n_trees == 0 || *max_depth == 0 || *max_features == Some(0) => {
                bad("RF needs positive tree count, depth and feature count")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub model: ModelParams,
    pub class_weight: ClassWeighting,
    pub standardize: bool,
}

impl Hyperparams {
    pub fn default_for(kind: ClassifierKind) -> Self {
        Hyperparams {
            model: ModelParams::default_for(kind),
            class_weight: ClassWeighting::Balanced,
            standardize: true,
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.model.kind()
    }
}

/// Per-feature `(x − mean) / scale`, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(p: usize) -> Self {
        Standardizer {
            mean: vec![0.0; p],
            scale: vec![1.0; p],
        }
    }

    /// Population standard deviation; constant features keep scale 1.
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let p = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..p)
            .map(|j| {
                let sd = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|r| {
                r.iter()
                    .zip(self.mean.iter().zip(&self.scale))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        /// Weighted fraction of class 1.
        p1: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn p1(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { p1 } => return *p1,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

/// Learned parameters of one base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Fitted {
    #[serde(rename = "LR")]
    Logistic { weights: Vec<f64>, bias: f64 },
    #[serde(rename = "KNN")]
    Knn {
        k: usize,
        x: Vec<Vec<f64>>,
        y: Vec<u8>,
        class_weights: [f64; 2],
    },
    #[serde(rename = "MLP")]
    Mlp { layers: Vec<LayerRecord> },
    #[serde(rename = "RF")]
    Forest { trees: Vec<Tree> },
}

impl Fitted {
    /// Predictions for already standardized rows.
    fn predict(&self, x: &[Vec<f64>]) -> Vec<u8> {
        match self {
            Fitted::Logistic { weights, bias } => x
                .iter()
                .map(|r| u8::from(dot(weights, r) + bias > 0.0))
                .collect(),
            Fitted::Knn {
                k,
                x: train,
                y,
                class_weights,
            } => x.iter().map(|r| knn_vote(*k, train, y, class_weights, r)).collect(),
            Fitted::Mlp { layers } => {
                let dense: Vec<Dense> = layers.iter().filter_map(LayerRecord::to_dense).collect();
                mlp_forward(&dense, &to_array(x))
                    .last()
                    .unwrap()
                    .iter()
                    .map(|&z| u8::from(z > 0.0))
                    .collect()
            }
            Fitted::Forest { trees } => x
                .iter()
                .map(|r| {
                    let p = trees.iter().map(|t| t.p1(r)).sum::<f64>() / trees.len() as f64;
                    u8::from(p > 0.5)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub standardizer: Standardizer,
    pub fitted: Fitted,
}

/// A fitted certainty classifier: one member, or a bagged ensemble voting
/// by majority with ties going to certain (0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: ClassifierKind,
    pub hyperparams: Hyperparams,
    pub n_features: usize,
    pub members: Vec<Member>,
}

impl ClassifierModel {
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<u8>> {
        check_x(x, Some(self.n_features))?;
        let votes: Vec<Vec<u8>> = self
            .members
            .iter()
            .map(|m| m.fitted.predict(&m.standardizer.transform(x)))
            .collect();
        let half = self.members.len();
        Ok((0..x.len())
            .map(|i| {
                let ones: usize = votes.iter().map(|v| v[i] as usize).sum();
                u8::from(2 * ones > half)
            })
            .collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_array(x: &[Vec<f64>]) -> Array2<f64> {
    let p = x.first().map_or(0, Vec::len);
    Array2::from_shape_fn((x.len(), p), |(i, j)| x[i][j])
}

/// `[w_0, w_1]` with `w_c = N / (2 · N_c)`.
pub fn balanced_class_weights(y: &[u8]) -> [f64; 2] {
    let n = y.len() as f64;
    let n1 = y.iter().filter(|&&v| v == 1).count() as f64;
    let n0 = n - n1;
    let w = |c: f64| if c > 0.0 { n / (2.0 * c) } else { 0.0 };
    [w(n0), w(n1)]
}

fn class_weights(y: &[u8], mode: ClassWeighting) -> [f64; 2] {
    match mode {
        ClassWeighting::None => [1.0, 1.0],
        ClassWeighting::Balanced => balanced_class_weights(y),
    }
}

/// Duplicates randomly drawn minority rows until both classes are equally
/// frequent. Original rows keep their order; additions are appended.
pub fn oversample_minority(x: &[Vec<f64>], y: &[u8], seed: u64) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    check_xy(x, y)?;
    let ones: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
    let zeros: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 0).collect();
    let (minority, deficit) = if ones.len() < zeros.len() {
        let d = zeros.len() - ones.len();
        (ones, d)
    } else {
        let d = ones.len() - zeros.len();
        (zeros, d)
    };
    let mut rng = seed::rng(seed);
    let (mut xo, mut yo) = (x.to_vec(), y.to_vec());
    for _ in 0..deficit {
        let i = minority[rng.random_range(0..minority.len())];
        xo.push(x[i].clone());
        yo.push(y[i]);
    }
    Ok((xo, yo))
}

/// Class-stratified bootstrap: each class resampled with replacement to its
/// own size, so both classes survive.
pub fn bootstrap_indices(y: &[u8], seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(y.len());
    for c in 0..=1u8 {
        let members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        for _ in 0..members.len() {
            out.push(members[rng.random_range(0..members.len())]);
        }
    }
    out.sort_unstable();
    out
}

/// Fits one classifier.
pub fn train_classifier(hp: &Hyperparams, x: &[Vec<f64>], y: &[u8], seed: u64) -> Result<ClassifierModel> {
    let p = check_xy(x, y)?;
    hp.model.validate()?;
    Ok(ClassifierModel {
        kind: hp.kind(),
        hyperparams: hp.clone(),
        n_features: p,
        members: vec![fit_member(hp, x, y, seed)],
    })
}

/// Bagged ensemble of `n_estimators` members on stratified bootstrap
/// resamples; member `i` uses seed `derive(seed, i)` for both its resample
/// and its own fit.
pub fn bagging_ensemble(
    hp: &Hyperparams,
    x: &[Vec<f64>],
    y: &[u8],
    n_estimators: usize,
    seed: u64,
) -> Result<ClassifierModel> {
    let p = check_xy(x, y)?;
    hp.model.validate()?;
    if n_estimators == 0 {
        return Err(UncertaintyError::InvalidHyperparams("n_estimators must be ≥ 1".into()));
    }
    let members = (0..n_estimators)
        .map(|i| {
            let s = seed::derive(seed, i as u64);
            let idx = bootstrap_indices(y, s);
            let xb: Vec<Vec<f64>> = idx.iter().map(|&j| x[j].clone()).collect();
            let yb: Vec<u8> = idx.iter().map(|&j| y[j]).collect();
            fit_member(hp, &xb, &yb, s)
        })
        .collect();
    Ok(ClassifierModel {
        kind: hp.kind(),
        hyperparams: hp.clone(),
        n_features: p,
        members,
    })
}

fn fit_member(hp: &Hyperparams, x: &[Vec<f64>], y: &[u8], seed: u64) -> Member {
    let standardizer = if hp.standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(x[0].len())
    };
    let xs = standardizer.transform(x);
    let cw = class_weights(y, hp.class_weight);
    let fitted = match &hp.model {
        ModelParams::Logistic { l2, max_iter, tol } => fit_logistic(&xs, y, cw, *l2, *max_iter, *tol),
        ModelParams::Knn { k } => Fitted::Knn {
            k: *k,
            x: xs,
            y: y.to_vec(),
            class_weights: cw,
        },
        ModelParams::Mlp {
            hidden,
            lr,
            epochs,
            batch_size,
            l2,
        } => fit_mlp(&xs, y, cw, hidden, *lr, *epochs, *batch_size, *l2, seed),
        ModelParams::Forest {
            n_trees,
            max_depth,
            min_samples_split,
            max_features,
        } => {
            let p = xs[0].len();
            let mtry = max_features.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize).min(p);
            let trees = (0..*n_trees)
                .map(|t| {
                    let mut rng = seed::sub_rng(seed, t as u64);
                    let idx: Vec<usize> = (0..xs.len()).map(|_| rng.random_range(0..xs.len())).collect();
                    grow_tree(&xs, y, cw, &idx, *max_depth, *min_samples_split, mtry, &mut rng)
                })
                .collect();
            Fitted::Forest { trees }
        }
    };
    Member { standardizer, fitted }
}

/// Weighted mean cross-entropy plus `l2/2 · |w|²`, and its gradient.
fn logistic_objective(x: &[Vec<f64>], y: &[u8], cw: [f64; 2], l2: f64, w: &[f64], b: f64) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (r, &t) in x.iter().zip(y) {
        let z = dot(w, r) + b;
        let s = cw[t as usize];
        // log(1 + e^z) − t·z, computed stably.
        let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        loss += s * (softplus - t as f64 * z);
        let d = s * (sigmoid(z) - t as f64);
        for (g, v) in gw.iter_mut().zip(r) {
            *g += d * v;
        }
        gb += d;
    }
    loss = loss / n + 0.5 * l2 * dot(w, w);
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    (loss, gw, gb / n)
}

fn fit_logistic(x: &[Vec<f64>], y: &[u8], cw: [f64; 2], l2: f64, max_iter: usize, tol: f64) -> Fitted {
    let p = x[0].len();
    let (mut w, mut b) = (vec![0.0; p], 0.0);
    let (mut f, mut gw, mut gb) = logistic_objective(x, y, cw, l2, &w, b);
    let mut step = 1.0;
    for _ in 0..max_iter {
        let g2 = dot(&gw, &gw) + gb * gb;
        if g2.sqrt() < tol {
            break;
        }
        step *= 2.0;
        // Armijo backtracking.
        loop {
            let wn: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
            let bn = b - step * gb;
            let (fnew, gwn, gbn) = logistic_objective(x, y, cw, l2, &wn, bn);
            if fnew <= f - 1e-4 * step * g2 || step < 1e-20 {
                (w, b, f, gw, gb) = (wn, bn, fnew, gwn, gbn);
                break;
            }
            step *= 0.5;
        }
    }
    Fitted::Logistic { weights: w, bias: b }
}

fn knn_vote(k: usize, train: &[Vec<f64>], y: &[u8], cw: &[f64; 2], r: &[f64]) -> u8 {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, t)| (t.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum(), i))
        .collect();
    let k = k.min(d.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, cmp);
    }
    let mut votes = [0.0; 2];
    for &(_, i) in &d[..k] {
        votes[y[i] as usize] += cw[y[i] as usize];
    }
    u8::from(votes[1] > votes[0])
}

/// Pre-activations of every layer; the last one holds the output logits.
fn mlp_forward(layers: &[Dense], x: &Array2<f64>) -> Vec<Array2<f64>> {
    let mut outs = Vec::with_capacity(layers.len());
    let mut h = x.clone();
    for (i, l) in layers.iter().enumerate() {
        let mut z = l.forward(&h.view());
        if i + 1 < layers.len() {
            relu_inplace(&mut z);
        }
        h = z.clone();
        outs.push(z);
    }
    outs
}

#[allow(clippy::too_many_arguments)]
fn fit_mlp(
    x: &[Vec<f64>],
    y: &[u8],
    cw: [f64; 2],
    hidden: &[usize],
    lr: f64,
    epochs: usize,
    batch_size: usize,
    l2: f64,
    seed: u64,
) -> Fitted {
    let mut rng = seed::rng(seed);
    let mut dims = vec![x[0].len()];
    dims.extend_from_slice(hidden);
    dims.push(1);
    let mut layers: Vec<Dense> = dims.windows(2).map(|d| Dense::he_uniform(d[0], d[1], &mut rng)).collect();
    let mut adam = Adam::new(
        AdamParams {
            weight_decay: l2,
            ..AdamParams::default()
        },
        &layers,
    );
    let xa = to_array(x);
    let mut order: Vec<usize> = (0..x.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch_size) {
            let xb = xa.select(ndarray::Axis(0), chunk);
            let outs = mlp_forward(&layers, &xb);
            let logits = outs.last().unwrap();
            let b = chunk.len() as f64;
            let mut dy = Array2::from_shape_fn((chunk.len(), 1), |(i, _)| {
                let t = y[chunk[i]];
                cw[t as usize] * (sigmoid(logits[(i, 0)]) - t as f64) / b
            });
            let mut grads: Vec<Dense> = layers.iter().map(Dense::zeros_like).collect();
            for li in (0..layers.len()).rev() {
                let input: ArrayView2<f64> = if li == 0 { xb.view() } else { outs[li - 1].view() };
                dy = layers[li].backward(&input, &dy, &mut grads[li]);
                if li > 0 {
                    relu_backward(&mut dy, &outs[li - 1]);
                }
            }
            adam.step(&mut layers, &grads, lr);
        }
    }
    Fitted::Mlp {
        layers: layers
            .iter()
            .enumerate()
            .map(|(i, d)| LayerRecord::from_dense(format!("dense_{i}"), d))
            .collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn grow_tree(
    x: &[Vec<f64>],
    y: &[u8],
    cw: [f64; 2],
    idx: &[usize],
    max_depth: usize,
    min_split: usize,
    mtry: usize,
    rng: &mut impl Rng,
) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    build_node(&mut tree, x, y, cw, idx.to_vec(), 0, max_depth, min_split, mtry, rng);
    tree
}

fn class_mass(y: &[u8], cw: [f64; 2], idx: &[usize]) -> [f64; 2] {
    let mut m = [0.0; 2];
    for &i in idx {
        m[y[i] as usize] += cw[y[i] as usize];
    }
    m
}

fn gini(m: [f64; 2]) -> f64 {
    let t = m[0] + m[1];
    if t <= 0.0 {
        return 0.0;
    }
    let (a, b) = (m[0] / t, m[1] / t);
    1.0 - a * a - b * b
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    tree: &mut Tree,
    x: &[Vec<f64>],
    y: &[u8],
    cw: [f64; 2],
    idx: Vec<usize>,
    depth: usize,
    max_depth: usize,
    min_split: usize,
    mtry: usize,
    rng: &mut impl Rng,
) -> usize {
    let id = tree.nodes.len();
    let mass = class_mass(y, cw, &idx);
    let total = mass[0] + mass[1];
    let p1 = if total > 0.0 { mass[1] / total } else { 0.0 };
    tree.nodes.push(TreeNode::Leaf { p1 });
    if depth >= max_depth || idx.len() < min_split.max(2) || mass[0] == 0.0 || mass[1] == 0.0 {
        return id;
    }
    let p = x[0].len();
    let mut features: Vec<usize> = (0..p).collect();
    let (chosen, _) = features.partial_shuffle(rng, mtry);
    let parent = gini(mass) * total;
    let mut best: Option<(f64, usize, f64)> = None;
    for &f in chosen.iter() {
        let mut sorted = idx.clone();
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = [0.0; 2];
        for k in 0..sorted.len() - 1 {
            let i = sorted[k];
            left[y[i] as usize] += cw[y[i] as usize];
            let (v, next) = (x[i][f], x[sorted[k + 1]][f]);
            if v == next {
                continue;
            }
            let right = [mass[0] - left[0], mass[1] - left[1]];
            let child = gini(left) * (left[0] + left[1]) + gini(right) * (right[0] + right[1]);
            let gain = parent - child;
            if gain > 1e-12 && best.map_or(true, |b| gain > b.0) {
                best = Some((gain, f, 0.5 * (v + next)));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return id;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
    let left = build_node(tree, x, y, cw, l, depth + 1, max_depth, min_split, mtry, rng);
    let right = build_node(tree, x, y, cw, r, depth + 1, max_depth, min_split, mtry, rng);
    tree.nodes[id] = TreeNode::Split {
        feature,
        threshold,
        left,
        right,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two Gaussian blobs separated along every axis.
    fn blobs(n: usize, seed: u64, gap: f64) -> (Vec<Vec<f64>>, Vec<u8>) {
        use rand_distr::{Distribution, Normal};
        let mut rng = seed::rng(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = (i % 2) as u8;
            x.push(vec![
                c as f64 * gap + noise.sample(&mut rng),
                10.0 * (c as f64 * gap + noise.sample(&mut rng)),
                noise.sample(&mut rng),
            ]);
            y.push(c);
        }
        (x, y)
    }

    fn acc(m: &ClassifierModel, x: &[Vec<f64>], y: &[u8]) -> f64 {
        let p = m.predict(x).unwrap();
        super::super::classification_metrics(y, &p).unwrap().balanced_accuracy
    }

    #[test]
    fn balanced_weight_fixture() {
        let mut y = vec![0u8; 90];
        y.extend(vec![1u8; 10]);
        let w = balanced_class_weights(&y);
        assert!((w[0] - 100.0 / 180.0).abs() < 1e-12);
        assert!((w[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn every_kind_separates_blobs() {
        let (x, y) = blobs(120, 1, 8.0);
        for kind in ClassifierKind::ALL {
            let m = train_classifier(&Hyperparams::default_for(kind), &x, &y, 3).unwrap();
            assert_eq!(acc(&m, &x, &y), 1.0, "{kind}");
            let (xt, yt) = blobs(60, 2, 8.0);
            assert!(acc(&m, &xt, &yt) > 0.95, "{kind}");
        }
    }

    #[test]
    fn knn_one_reproduces_training_labels() {
        let (x, y) = blobs(50, 4, 0.5);
        let hp = Hyperparams {
            model: ModelParams::Knn { k: 1 },
            ..Hyperparams::default_for(ClassifierKind::Knn)
        };
        let m = train_classifier(&hp, &x, &y, 0).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn knn_distance_ties_take_lower_index() {
        let x = vec![vec![1.0], vec![-1.0], vec![5.0]];
        let y = vec![1, 0, 0];
        assert_eq!(knn_vote(1, &x, &y, &[1.0, 1.0], &[0.0]), 1);
        let y = vec![0, 1, 1];
        assert_eq!(knn_vote(1, &x, &y, &[1.0, 1.0], &[0.0]), 0);
        // Two-way vote split goes to 0.
        assert_eq!(knn_vote(2, &x, &[1, 0, 0], &[1.0, 1.0], &[0.0]), 0);
    }

    #[test]
    fn logistic_standardization_does_not_change_decisions() {
        let (x, y) = blobs(60, 6, 6.0);
        let mk = |standardize| Hyperparams {
            model: ModelParams::Logistic {
                l2: 1e-3,
                max_iter: 100_000,
                tol: 1e-8,
            },
            class_weight: ClassWeighting::None,
            standardize,
        };
        let a = train_classifier(&mk(true), &x, &y, 0).unwrap();
        let b = train_classifier(&mk(false), &x, &y, 0).unwrap();
        assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
        assert_eq!(a.predict(&x).unwrap(), y);
    }

    #[test]
    fn single_class_and_bad_rows() {
        let x = vec![vec![1.0], vec![2.0]];
        let hp = Hyperparams::default_for(ClassifierKind::Lr);
        assert!(matches!(train_classifier(&hp, &x, &[0, 0], 0), Err(UncertaintyError::SingleClass)));
        assert!(matches!(oversample_minority(&x, &[1, 1], 0), Err(UncertaintyError::SingleClass)));
        let nan = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(
            train_classifier(&hp, &nan, &[0, 1], 0),
            Err(UncertaintyError::NonFiniteFeature { row: 1, column: 0 })
        ));
    }

    #[test]
    fn oversampling_counts() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y = vec![1, 0, 0, 0, 0, 1, 0, 0, 0, 0];
        let (xo, yo) = oversample_minority(&x, &y, 3).unwrap();
        assert_eq!(yo.iter().filter(|&&v| v == 1).count(), 8);
        assert_eq!(yo.len(), 16);
        for (r, &l) in xo.iter().zip(&yo).skip(10) {
            assert_eq!(l, 1);
            assert!(r[0] == 0.0 || r[0] == 5.0);
        }
        let bal: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let xb: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        assert_eq!(oversample_minority(&xb, &bal, 1).unwrap(), (xb.clone(), bal.clone()));
    }

    #[test]
    fn single_bag_equals_bootstrap_model() {
        let (x, y) = blobs(40, 8, 2.0);
        for kind in ClassifierKind::ALL {
            let hp = Hyperparams::default_for(kind);
            let bag = bagging_ensemble(&hp, &x, &y, 1, 17).unwrap();
            let s = seed::derive(17, 0);
            let idx = bootstrap_indices(&y, s);
            let xb: Vec<Vec<f64>> = idx.iter().map(|&j| x[j].clone()).collect();
            let yb: Vec<u8> = idx.iter().map(|&j| y[j]).collect();
            let single = train_classifier(&hp, &xb, &yb, s).unwrap();
            assert_eq!(bag.members, single.members, "{kind}");
        }
    }

    #[test]
    fn vote_ties_go_to_certain() {
        let member = |bias: f64| Member {
            standardizer: Standardizer::identity(1),
            fitted: Fitted::Logistic {
                weights: vec![0.0],
                bias,
            },
        };
        let mut m = ClassifierModel {
            kind: ClassifierKind::Lr,
            hyperparams: Hyperparams::default_for(ClassifierKind::Lr),
            n_features: 1,
            members: vec![member(1.0), member(-1.0)],
        };
        assert_eq!(m.predict(&[vec![0.3]]).unwrap(), vec![0]);
        m.members = vec![member(1.0), member(1.0), member(1.0)];
        assert_eq!(m.predict(&[vec![0.3]]).unwrap(), vec![1]);
    }

    proptest! {
        #[test]
        fn oversampling_keeps_distinct_rows(rows in prop::collection::vec((0u8..5, 0u8..2), 2..30), seed in any::<u64>()) {
            let x: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0 as f64]).collect();
            let y: Vec<u8> = rows.iter().map(|r| r.1).collect();
            prop_assume!(y.contains(&0) && y.contains(&1));
            let (xo, yo) = oversample_minority(&x, &y, seed).unwrap();
            for c in 0..=1u8 {
                let set = |xs: &[Vec<f64>], ys: &[u8]| {
                    let mut v: Vec<u64> = xs.iter().zip(ys).filter(|(_, &l)| l == c).map(|(r, _)| r[0].to_bits()).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                prop_assert_eq!(set(&x, &y), set(&xo, &yo));
            }
            let ones = yo.iter().filter(|&&v| v == 1).count();
            prop_assert_eq!(2 * ones, yo.len());
        }
    }
}
