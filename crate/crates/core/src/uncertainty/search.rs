use rand::Rng;

use super::classify::{ClassWeighting, ClassifierKind, Hyperparams, ModelParams};

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn pick<T: Clone>(rng: &mut impl Rng, options: &[T]) -> T {
    options[rng.random_range(0..options.len())].clone()
}

/// One draw from the randomized-search space of `kind`.
pub fn sample_hyperparams(kind: ClassifierKind, rng: &mut impl Rng) -> Hyperparams {
    let model = match kind {
        ClassifierKind::Lr => ModelParams::Logistic {
            l2: log_uniform(rng, 1e-4, 10.0),
            max_iter: 2000,
            tol: 1e-6,
        },
        ClassifierKind::Knn => ModelParams::Knn {
            k: pick(rng, &[1, 3, 5, 7, 9, 11, 15, 21]),
        },
        ClassifierKind::Mlp => ModelParams::Mlp {
            hidden: pick(rng, &[vec![16], vec![32], vec![64], vec![32, 16]]),
            lr: log_uniform(rng, 1e-3, 1e-2),
            epochs: pick(rng, &[50, 100, 200]),
            batch_size: 32,
            l2: log_uniform(rng, 1e-6, 1e-2),
        },
        ClassifierKind::Rf => ModelParams::Forest {
            n_trees: pick(rng, &[25, 50, 100]),
            max_depth: rng.random_range(3..=12),
            min_samples_split: pick(rng, &[2, 4, 8]),
            max_features: None,
        },
    };
    Hyperparams {
        model,
        class_weight: pick(rng, &[ClassWeighting::None, ClassWeighting::Balanced]),
        standardize: true,
    }
}
