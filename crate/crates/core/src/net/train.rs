use rand::seq::SliceRandom;

use super::config::NetConfig;
use super::model::{Batch, GraceModel, GraceNet, TrainingRow, TrainingSummary};
use super::nn::{Adam, Dense};
use super::{ModelVariant, NetError, Result};
use crate::seed;

const STREAM_INIT: u64 = 0;
const STREAM_SHUFFLE: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// Trains `variant` with Adam, plateau decay and early stopping on the
/// validation loss, returning the parameters of the best validation epoch.
pub fn train(
    variant: ModelVariant,
    train_rows: &[TrainingRow],
    val_rows: &[TrainingRow],
    config: &NetConfig,
) -> Result<GraceModel> {
    config.validate()?;
    if train_rows.is_empty() {
        return Err(NetError::EmptySplit("train"));
    }
    if val_rows.is_empty() {
        return Err(NetError::EmptySplit("validation"));
    }
    let mut net = GraceNet::init(variant, config, &mut seed::sub_rng(config.seed, STREAM_INIT))?;
    let mut shuffle_rng = seed::sub_rng(config.seed, STREAM_SHUFFLE);
    let mut noise_rng = seed::sub_rng(config.seed, STREAM_NOISE);
    let val_refs: Vec<&TrainingRow> = val_rows.iter().collect();
    let val_batch = Batch::for_eval(variant, &val_refs, config)?;
    let val_loss = |net: &GraceNet, epoch: usize| -> Result<f64> {
        let l = net.loss(&val_batch)?.total;
        if l.is_finite() {
            Ok(l)
        } else {
            Err(NetError::DivergedLoss { epoch })
        }
    };

    let initial = val_loss(&net, 0)?;
    let mut best = initial;
    let mut best_layers: Vec<Dense> = net.layers().to_vec();
    let mut best_epoch = 0;
    let mut adam = Adam::new(config.adam, net.layers());
    let mut lr = config.lr;
    let (mut lr_bad, mut bad) = (0usize, 0usize);
    let mut summary = TrainingSummary {
        epochs_run: 0,
        best_epoch: 0,
        best_val_loss: initial,
        initial_val_loss: initial,
        lr_trace: Vec::new(),
        train_loss_trace: Vec::new(),
        val_loss_trace: Vec::new(),
        best_val_trace: Vec::new(),
        stopped_early: false,
    };
    let mut order: Vec<usize> = (0..train_rows.len()).collect();

    for epoch in 1..=config.max_epochs {
        summary.lr_trace.push(lr);
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let rows: Vec<&TrainingRow> = chunk.iter().map(|&i| &train_rows[i]).collect();
            let batch = Batch::assemble(variant, &rows, config, Some(&mut noise_rng))?;
            let (parts, grads) = net.backward(&batch)?;
            if !parts.total.is_finite() {
                return Err(NetError::DivergedLoss { epoch });
            }
            adam.step(net.layers_mut(), &grads, lr);
            total += parts.total;
            batches += 1;
        }
        let v = val_loss(&net, epoch)?;
        summary.epochs_run = epoch;
        summary.train_loss_trace.push(total / batches as f64);
        summary.val_loss_trace.push(v);
        if v < best - config.early_stop_epsilon {
            best = v;
            best_layers.clone_from_slice(net.layers());
            best_epoch = epoch;
            lr_bad = 0;
            bad = 0;
        } else {
            lr_bad += 1;
            bad += 1;
        }
        summary.best_val_trace.push(best);
        if bad >= config.early_stop_patience {
            summary.stopped_early = true;
            break;
        }
        if lr_bad >= config.lr_patience_epochs {
            lr *= config.lr_decay_factor;
            lr_bad = 0;
        }
    }
    net.layers_mut().clone_from_slice(&best_layers);
    summary.best_epoch = best_epoch;
    summary.best_val_loss = best;
    Ok(GraceModel::new(net, Some(summary)))
}

/// [`train`] restricted to the score-only autoencoders.
pub fn train_baseline(
    variant: ModelVariant,
    train_rows: &[TrainingRow],
    val_rows: &[TrainingRow],
    config: &NetConfig,
) -> Result<GraceModel> {
    if variant.uses_explanations() {
        return Err(NetError::WrongVariant {
            required: "AE, VAE or DAE",
            actual: variant,
        });
    }
    train(variant, train_rows, val_rows, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{correct_scores, predict_scores};
    use rand::Rng;

    fn small() -> NetConfig {
        NetConfig {
            n: 3,
            m: 2,
            branch_dim: 16,
            shared_dims: vec![32, 16],
            latent_dim: 8,
            max_epochs: 30,
            ..NetConfig::default()
        }
    }

    /// S_human = S_LLM + 0.8·(E − 0.5) on the first action.
    fn rows(k: usize, seed: u64) -> Vec<TrainingRow> {
        let mut rng = seed::rng(seed);
        (0..k)
            .map(|_| {
                let s: Vec<f64> = (0..3).map(|_| rng.random_range(1.5..4.5)).collect();
                let e: Vec<f64> = (0..2).map(|_| [0.0, 1.0][rng.random_range(0..2)]).collect();
                let mut h = s.clone();
                h[0] += 0.8 * (e[0] - 0.5);
                TrainingRow {
                    s_llm: s,
                    s_human: h,
                    e_human: e,
                }
            })
            .collect()
    }

    #[test]
    fn learns_and_tracks_best() {
        let (tr, va) = (rows(500, 1), rows(100, 2));
        let m = train(ModelVariant::Grace, &tr, &va, &small()).unwrap();
        let s = m.training.as_ref().unwrap();
        assert!(s.best_val_loss < s.initial_val_loss);
        assert!(s.best_val_trace.windows(2).all(|w| w[1] <= w[0]));
        let pairs: Vec<(&[f64], &[f64])> = va
            .iter()
            .map(|r| (r.s_llm.as_slice(), r.e_human.as_slice()))
            .collect();
        let out = correct_scores(&m, &pairs).unwrap();
        assert!(out.iter().flat_map(|v| v.as_slice()).all(|v| (1.0..=5.0).contains(v)));
    }

    #[test]
    fn deterministic_under_seed() {
        let (tr, va) = (rows(80, 3), rows(20, 4));
        let cfg = NetConfig {
            max_epochs: 4,
            ..small()
        };
        for v in [ModelVariant::GraceNoised, ModelVariant::Vae] {
            let a = train(v, &tr, &va, &cfg).unwrap();
            let b = train(v, &tr, &va, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn plateau_decays_once_then_stops() {
        let (tr, va) = (rows(40, 5), rows(10, 6));
        let cfg = NetConfig {
            lr: 1e-12,
            max_epochs: 200,
            ..small()
        };
        let m = train(ModelVariant::Grace, &tr, &va, &cfg).unwrap();
        let s = m.training.unwrap();
        assert!(s.stopped_early);
        assert_eq!(s.epochs_run, 20);
        let steps: Vec<usize> = s
            .lr_trace
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] != w[0])
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(steps, vec![10]);
        assert!((s.lr_trace[10] - 0.3e-12).abs() < 1e-24);
    }

    #[test]
    fn dae_without_noise_equals_ae() {
        let (tr, va) = (rows(60, 7), rows(15, 8));
        let cfg = NetConfig {
            max_epochs: 3,
            noise_prob: 0.0,
            ..small()
        };
        let ae = train_baseline(ModelVariant::Ae, &tr, &va, &cfg).unwrap();
        let dae = train_baseline(ModelVariant::Dae, &tr, &va, &cfg).unwrap();
        assert_eq!(ae.net.layers(), dae.net.layers());
    }

    #[test]
    fn ae_copies_identity() {
        let mk = |k, seed| {
            rows(k, seed)
                .into_iter()
                .map(|mut r| {
                    r.s_human = r.s_llm.clone();
                    r
                })
                .collect::<Vec<_>>()
        };
        let (tr, va, te) = (mk(600, 9), mk(100, 10), mk(100, 11));
        let cfg = NetConfig {
            max_epochs: 60,
            ..small()
        };
        let m = train_baseline(ModelVariant::Ae, &tr, &va, &cfg).unwrap();
        let inputs: Vec<&[f64]> = te.iter().map(|r| r.s_llm.as_slice()).collect();
        let out = predict_scores(&m, &inputs).unwrap();
        let mut se = 0.0;
        for (o, r) in out.iter().zip(&te) {
            for (a, b) in o.as_slice().iter().zip(&r.s_human) {
                se += ((a - b) / 4.0).powi(2);
            }
        }
        let rmse = (se / (te.len() * 3) as f64).sqrt();
        assert!(rmse < 0.1, "{rmse}");
    }

    #[test]
    fn empty_splits_and_wrong_variant() {
        let r = rows(5, 1);
        assert!(matches!(train(ModelVariant::Ae, &[], &r, &small()), Err(NetError::EmptySplit("train"))));
        assert!(matches!(train(ModelVariant::Ae, &r, &[], &small()), Err(NetError::EmptySplit(_))));
        assert!(matches!(
            train_baseline(ModelVariant::Grace, &r, &r, &small()),
            Err(NetError::WrongVariant { .. })
        ));
    }

    #[test]
    fn diverging_run_is_reported() {
        let r = rows(10, 1);
        let cfg = NetConfig {
            lr: f64::INFINITY,
            score_head: crate::net::ScoreHead::Linear,
            max_epochs: 3,
            ..small()
        };
        assert!(matches!(
            train(ModelVariant::Ae, &r, &r, &cfg),
            Err(NetError::DivergedLoss { .. }) | Err(NetError::InvalidConfig(_))
        ));
    }
}
