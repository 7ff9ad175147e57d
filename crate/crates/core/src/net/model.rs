use std::path::Path;

use ndarray::{concatenate, s, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{NetConfig, ScoreHead};
use super::nn::{relu_backward, relu_inplace, sigmoid, Dense, LayerRecord};
use super::noise::salt_pepper_with;
use super::{to_internal, ModelVariant, NetError, Result};

pub const MODEL_FORMAT: &str = "grace-model";
pub const MODEL_VERSION: u32 = 1;

/// Probability clamp used by the binary cross-entropy.
const BCE_EPS: f64 = 1e-7;

/// Which inference direction a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `c = 0`: LLM scores + human explanation → human scores.
    ScoreCorrection,
    /// `c = 1`: human scores + neutral explanation → human explanation.
    ExplanationGeneration,
}

impl Condition {
    pub fn flag(self) -> f64 {
        match self {
            Condition::ScoreCorrection => 0.0,
            Condition::ExplanationGeneration => 1.0,
        }
    }
}

/// One supervised row on the raw `[1, 5]` score scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub s_llm: Vec<f64>,
    pub s_human: Vec<f64>,
    /// Normalized explanation; ignored by score-only variants.
    pub e_human: Vec<f64>,
}

/// Network-ready samples. Scores are on the internal scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub cond: Array2<f64>,
    pub scores: Array2<f64>,
    pub expl: Array2<f64>,
    pub target_scores: Array2<f64>,
    pub target_expl: Array2<f64>,
    /// Reparameterization noise (variational variant only).
    pub eps: Option<Array2<f64>>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.scores.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Assembles samples for `variant`.
    ///
    /// GRACE rows expand into a `c = 0` and a `c = 1` sample, interleaved,
    /// both targeting `(S_human, E_human)`. With `rng` set (training), the
    /// denoising variants corrupt their inputs and the variational variant
    /// draws `ε ~ N(0, I)`; without it inputs are clean and `ε = 0`.
    pub fn assemble<R: Rng>(
        variant: ModelVariant,
        rows: &[&TrainingRow],
        config: &NetConfig,
        mut rng: Option<&mut R>,
    ) -> Result<Batch> {
        let (n, m) = (config.n, config.m);
        for r in rows {
            check_len("S_LLM", n, r.s_llm.len())?;
            check_len("S_human", n, r.s_human.len())?;
            if variant.uses_explanations() {
                check_len("E_human", m, r.e_human.len())?;
            }
        }
        let per_row = if variant.uses_explanations() { 2 } else { 1 };
        let b = rows.len() * per_row;
        let mut cond = Array2::zeros((b, 1));
        let mut scores = Array2::zeros((b, n));
        let mut expl = Array2::from_elem((b, m), 0.5);
        let mut target_scores = Array2::zeros((b, n));
        let mut target_expl = Array2::from_elem((b, m), 0.5);
        let p = config.noise_prob;

        for (i, r) in rows.iter().enumerate() {
            let s_llm: Vec<f64> = r.s_llm.iter().map(|&v| to_internal(v)).collect();
            let s_hum: Vec<f64> = r.s_human.iter().map(|&v| to_internal(v)).collect();
            match variant {
                ModelVariant::Grace | ModelVariant::GraceNoised => {
                    let noised = variant == ModelVariant::GraceNoised;
                    let (k0, k1) = (2 * i, 2 * i + 1);
                    let s0 = match (&mut rng, noised) {
                        (Some(rng), true) => salt_pepper_with(&s_llm, p, &mut **rng)?,
                        _ => s_llm.clone(),
                    };
                    let e1 = match (&mut rng, noised) {
                        (Some(rng), true) => salt_pepper_with(&vec![0.5; m], p, &mut **rng)?,
                        _ => vec![0.5; m],
                    };
                    cond[(k0, 0)] = 0.0;
                    cond[(k1, 0)] = 1.0;
                    for j in 0..n {
                        scores[(k0, j)] = s0[j];
                        scores[(k1, j)] = s_hum[j];
                        target_scores[(k0, j)] = s_hum[j];
                        target_scores[(k1, j)] = s_hum[j];
                    }
                    for j in 0..m {
                        expl[(k0, j)] = r.e_human[j];
                        expl[(k1, j)] = e1[j];
                        target_expl[(k0, j)] = r.e_human[j];
                        target_expl[(k1, j)] = r.e_human[j];
                    }
                }
                ModelVariant::Ae | ModelVariant::Vae | ModelVariant::Dae => {
                    let s0 = match (&mut rng, variant) {
                        (Some(rng), ModelVariant::Dae) => salt_pepper_with(&s_llm, p, &mut **rng)?,
                        _ => s_llm,
                    };
                    for j in 0..n {
                        scores[(i, j)] = s0[j];
                        target_scores[(i, j)] = s_hum[j];
                    }
                }
            }
        }
        let eps = variant.is_variational().then(|| match rng {
            Some(rng) => {
                Array2::from_shape_fn((b, config.latent_dim), |_| StandardNormal.sample(&mut *rng))
            }
            None => Array2::zeros((b, config.latent_dim)),
        });
        Ok(Batch {
            cond,
            scores,
            expl,
            target_scores,
            target_expl,
            eps,
        })
    }

    /// Clean evaluation batch.
    pub fn for_eval(variant: ModelVariant, rows: &[&TrainingRow], config: &NetConfig) -> Result<Batch> {
        Batch::assemble::<rand_chacha::ChaCha8Rng>(variant, rows, config, None)
    }
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(NetError::ShapeMismatch {
            what: what.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

/// Layer indices by role.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    score_enc: usize,
    expl_enc: Option<usize>,
    encoder: Vec<usize>,
    latent: usize,
    logvar: Option<usize>,
    decoder: Vec<usize>,
    score_head: usize,
    expl_head: Option<usize>,
    names: Vec<String>,
}

impl Layout {
    /// `(name, inputs, outputs)` in declared order.
    fn shapes(variant: ModelVariant, c: &NetConfig) -> Vec<(String, usize, usize)> {
        let expl = variant.uses_explanations();
        let cond = usize::from(expl);
        let mut out = vec![("score_encoder".to_string(), c.n, c.branch_dim)];
        if expl {
            out.push(("explanation_encoder".into(), c.m, c.branch_dim));
        }
        let mut width = cond + c.branch_dim * if expl { 2 } else { 1 };
        for (i, &d) in c.shared_dims.iter().enumerate() {
            out.push((format!("shared_encoder_{i}"), width, d));
            width = d;
        }
        out.push(("latent".into(), width, c.latent_dim));
        if variant.is_variational() {
            out.push(("latent_logvar".into(), width, c.latent_dim));
        }
        let mut width = cond + c.latent_dim;
        for (i, &d) in c.shared_dims.iter().rev().enumerate() {
            out.push((format!("shared_decoder_{i}"), width, d));
            width = d;
        }
        out.push(("score_decoder".into(), width, c.n));
        if expl {
            out.push(("explanation_decoder".into(), width, c.m));
        }
        out
    }

    fn new(variant: ModelVariant, c: &NetConfig) -> Self {
        let names: Vec<String> = Self::shapes(variant, c).into_iter().map(|s| s.0).collect();
        let find = |n: &str| names.iter().position(|x| x == n);
        let prefixed = |p: &str| -> Vec<usize> {
            names
                .iter()
                .enumerate()
                .filter(|(_, n)| n.starts_with(p))
                .map(|(i, _)| i)
                .collect()
        };
        Layout {
            score_enc: find("score_encoder").unwrap(),
            expl_enc: find("explanation_encoder"),
            encoder: prefixed("shared_encoder_"),
            latent: find("latent").unwrap(),
            logvar: find("latent_logvar"),
            decoder: prefixed("shared_decoder_"),
            score_head: find("score_decoder").unwrap(),
            expl_head: find("explanation_decoder"),
            names,
        }
    }
}

/// Forward-pass intermediates kept for backpropagation.
struct Cache {
    h_score: Array2<f64>,
    h_expl: Option<Array2<f64>>,
    /// Inputs to each shared encoder layer, then the latent input.
    enc_inputs: Vec<Array2<f64>>,
    mu: Array2<f64>,
    logvar: Option<Array2<f64>>,
    /// Inputs to each shared decoder layer, then the head input.
    dec_inputs: Vec<Array2<f64>>,
    s_out: Array2<f64>,
    e_out: Option<Array2<f64>>,
}

/// Loss components (batch means).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossParts {
    pub mse: f64,
    pub bce: f64,
    pub kl: f64,
    pub total: f64,
}

/// Combined objective `alpha · MSE + (1 − alpha) · BCE`, means over all
/// entries. Predicted probabilities are clamped to `[1e-7, 1 − 1e-7]`.
pub fn combined_loss(
    pred_scores: &[f64],
    pred_expl: &[f64],
    target_scores: &[f64],
    target_expl: &[f64],
    alpha: f64,
) -> f64 {
    alpha * mse(pred_scores, target_scores) + (1.0 - alpha) * bce(pred_expl, target_expl)
}

fn mse(pred: &[f64], target: &[f64]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64
}

fn bce(pred: &[f64], target: &[f64]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter()
        .zip(target)
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / pred.len() as f64
}

/// Parameters and forward/backward passes of one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct GraceNet {
    variant: ModelVariant,
    config: NetConfig,
    layout: Layout,
    layers: Vec<Dense>,
}

impl GraceNet {
    /// Seeded He-uniform initialization.
    pub fn init(variant: ModelVariant, config: &NetConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let layers = Layout::shapes(variant, config)
            .into_iter()
            .map(|(_, i, o)| Dense::he_uniform(i, o, rng))
            .collect();
        Ok(GraceNet {
            variant,
            config: config.clone(),
            layout: Layout::new(variant, config),
            layers,
        })
    }

    /// All parameters zero.
    pub fn zeroed(variant: ModelVariant, config: &NetConfig) -> Result<Self> {
        config.validate()?;
        let layers = Layout::shapes(variant, config)
            .into_iter()
            .map(|(_, i, o)| Dense::zeros(i, o))
            .collect();
        Ok(GraceNet {
            variant,
            config: config.clone(),
            layout: Layout::new(variant, config),
            layers,
        })
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn layer_names(&self) -> &[String] {
        &self.layout.names
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        check_len("score input", self.config.n, batch.scores.ncols())?;
        check_len("score target", self.config.n, batch.target_scores.ncols())?;
        if self.variant.uses_explanations() {
            check_len("explanation input", self.config.m, batch.expl.ncols())?;
            check_len("explanation target", self.config.m, batch.target_expl.ncols())?;
        }
        if self.variant.is_variational() {
            match &batch.eps {
                Some(e) => check_len("latent noise", self.config.latent_dim, e.ncols())?,
                None => {
                    return Err(NetError::ShapeMismatch {
                        what: "latent noise".into(),
                        expected: self.config.latent_dim,
                        found: 0,
                    })
                }
            }
        }
        Ok(())
    }

    fn run(&self, batch: &Batch) -> Cache {
        let l = &self.layout;
        let expl = self.variant.uses_explanations();
        let mut h_score = self.layers[l.score_enc].forward(&batch.scores.view());
        relu_inplace(&mut h_score);
        let h_expl = l.expl_enc.map(|i| {
            let mut h = self.layers[i].forward(&batch.expl.view());
            relu_inplace(&mut h);
            h
        });
        let mut x = if expl {
            concatenate(
                Axis(1),
                &[batch.cond.view(), h_score.view(), h_expl.as_ref().unwrap().view()],
            )
            .unwrap()
        } else {
            h_score.clone()
        };
        let mut enc_inputs = Vec::with_capacity(l.encoder.len() + 1);
        for &i in &l.encoder {
            let mut y = self.layers[i].forward(&x.view());
            relu_inplace(&mut y);
            enc_inputs.push(std::mem::replace(&mut x, y));
        }
        let mu = self.layers[l.latent].forward(&x.view());
        let logvar = l.logvar.map(|i| self.layers[i].forward(&x.view()));
        enc_inputs.push(x);

        let z = match (&logvar, &batch.eps) {
            (Some(lv), Some(eps)) => &mu + &(lv.mapv(|v| (0.5 * v).exp()) * eps),
            _ => mu.clone(),
        };
        let mut d = if expl {
            concatenate(Axis(1), &[batch.cond.view(), z.view()]).unwrap()
        } else {
            z
        };
        let mut dec_inputs = Vec::with_capacity(l.decoder.len() + 1);
        for &i in &l.decoder {
            let mut y = self.layers[i].forward(&d.view());
            relu_inplace(&mut y);
            dec_inputs.push(std::mem::replace(&mut d, y));
        }
        let mut s_out = self.layers[l.score_head].forward(&d.view());
        if self.config.score_head == ScoreHead::Logistic {
            s_out.mapv_inplace(sigmoid);
        }
        let e_out = l.expl_head.map(|i| self.layers[i].forward(&d.view()).mapv(sigmoid));
        dec_inputs.push(d);
        Cache {
            h_score,
            h_expl,
            enc_inputs,
            mu,
            logvar,
            dec_inputs,
            s_out,
            e_out,
        }
    }

    /// Internal-scale scores and explanation probabilities.
    pub fn predict(&self, batch: &Batch) -> Result<(Array2<f64>, Option<Array2<f64>>)> {
        self.check_batch(batch)?;
        let c = self.run(batch);
        Ok((c.s_out, c.e_out))
    }

    fn loss_from_cache(&self, batch: &Batch, c: &Cache) -> LossParts {
        let flat = |a: &Array2<f64>| a.iter().copied().collect::<Vec<_>>();
        let mse_v = mse(&flat(&c.s_out), &flat(&batch.target_scores));
        let (mse_w, bce_v) = match &c.e_out {
            Some(e) => (self.config.alpha, bce(&flat(e), &flat(&batch.target_expl))),
            None => (1.0, 0.0),
        };
        let kl = match &c.logvar {
            Some(lv) => {
                let b = c.mu.nrows().max(1) as f64;
                let sum: f64 = ndarray::Zip::from(&c.mu)
                    .and(lv)
                    .fold(0.0, |acc, &m, &v| acc - 0.5 * (1.0 + v - m * m - v.exp()));
                sum / b
            }
            None => 0.0,
        };
        let total = mse_w * mse_v + (1.0 - mse_w) * bce_v + self.config.kl_weight * kl;
        LossParts {
            mse: mse_v,
            bce: bce_v,
            kl,
            total,
        }
    }

    /// Objective on a batch: `alpha · MSE + (1 − alpha) · BCE` for the
    /// explanation-aware variants, MSE for score-only ones, plus the
    /// weighted KL term for the variational one.
    pub fn loss(&self, batch: &Batch) -> Result<LossParts> {
        self.check_batch(batch)?;
        let c = self.run(batch);
        Ok(self.loss_from_cache(batch, &c))
    }

    /// Exact gradients of [`GraceNet::loss`] w.r.t. every layer, in layer
    /// order. Weight decay is not included.
    pub fn backward(&self, batch: &Batch) -> Result<(LossParts, Vec<Dense>)> {
        self.check_batch(batch)?;
        let c = self.run(batch);
        let parts = self.loss_from_cache(batch, &c);
        let l = &self.layout;
        let cfg = &self.config;
        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        let expl = self.variant.uses_explanations();
        let cond = usize::from(expl);

        // Heads.
        let mse_w = if expl { cfg.alpha } else { 1.0 };
        let scale = 2.0 * mse_w / c.s_out.len().max(1) as f64;
        let mut dz_s = (&c.s_out - &batch.target_scores) * scale;
        if cfg.score_head == ScoreHead::Logistic {
            dz_s.zip_mut_with(&c.s_out, |d, &p| *d *= p * (1.0 - p));
        }
        let head_in = c.dec_inputs.last().unwrap();
        let mut dd = self.layers[l.score_head].backward(&head_in.view(), &dz_s, &mut grads[l.score_head]);
        if let (Some(hi), Some(e)) = (l.expl_head, &c.e_out) {
            let k = (1.0 - cfg.alpha) / e.len().max(1) as f64;
            let mut dz_e = e - &batch.target_expl;
            dz_e.zip_mut_with(e, |d, &p| {
                *d = if (BCE_EPS..=1.0 - BCE_EPS).contains(&p) { *d * k } else { 0.0 };
            });
            dd += &self.layers[hi].backward(&head_in.view(), &dz_e, &mut grads[hi]);
        }

        // Shared decoder, last layer first.
        for (pos, &i) in l.decoder.iter().enumerate().rev() {
            relu_backward(&mut dd, &c.dec_inputs[pos + 1]);
            dd = self.layers[i].backward(&c.dec_inputs[pos].view(), &dd, &mut grads[i]);
        }
        let dz = dd.slice(s![.., cond..]).to_owned();

        // Latent.
        let b = c.mu.nrows().max(1) as f64;
        let latent_in = c.enc_inputs.last().unwrap();
        let mut dmu = dz.clone();
        if let (Some(lvi), Some(lv), Some(eps)) = (l.logvar, &c.logvar, &batch.eps) {
            let kw = cfg.kl_weight;
            dmu.zip_mut_with(&c.mu, |d, &m| *d += kw * m / b);
            let mut dlv = dz.clone();
            ndarray::Zip::from(&mut dlv)
                .and(lv)
                .and(eps)
                .for_each(|d, &v, &e| {
                    *d = *d * e * 0.5 * (0.5 * v).exp() + kw * 0.5 * (v.exp() - 1.0) / b;
                });
            let mut dx = self.layers[l.latent].backward(&latent_in.view(), &dmu, &mut grads[l.latent]);
            dx += &self.layers[lvi].backward(&latent_in.view(), &dlv, &mut grads[lvi]);
            dd = dx;
        } else {
            dd = self.layers[l.latent].backward(&latent_in.view(), &dmu, &mut grads[l.latent]);
        }

        // Shared encoder.
        for (pos, &i) in l.encoder.iter().enumerate().rev() {
            relu_backward(&mut dd, &c.enc_inputs[pos + 1]);
            dd = self.layers[i].backward(&c.enc_inputs[pos].view(), &dd, &mut grads[i]);
        }

        // Input branches.
        let bd = cfg.branch_dim;
        let mut dhs = dd.slice(s![.., cond..cond + bd]).to_owned();
        relu_backward(&mut dhs, &c.h_score);
        self.layers[l.score_enc].backward(&batch.scores.view(), &dhs, &mut grads[l.score_enc]);
        if let (Some(ei), Some(he)) = (l.expl_enc, &c.h_expl) {
            let mut dhe = dd.slice(s![.., cond + bd..cond + 2 * bd]).to_owned();
            relu_backward(&mut dhe, he);
            self.layers[ei].backward(&batch.expl.view(), &dhe, &mut grads[ei]);
        }
        Ok((parts, grads))
    }

    /// Latent mean for a batch (used to check conditioning).
    pub fn latent(&self, batch: &Batch) -> Result<Array2<f64>> {
        self.check_batch(batch)?;
        Ok(self.run(batch).mu)
    }
}

/// Record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    /// Validation loss of the initialized network, before any update.
    pub initial_val_loss: f64,
    /// Learning rate used in each epoch.
    pub lr_trace: Vec<f64>,
    pub train_loss_trace: Vec<f64>,
    pub val_loss_trace: Vec<f64>,
    /// Best-so-far validation loss after each epoch.
    pub best_val_trace: Vec<f64>,
    pub stopped_early: bool,
}

impl TrainingSummary {
    /// Summary for parameters fixed without any training epoch.
    pub fn untrained() -> Self {
        TrainingSummary {
            epochs_run: 0,
            best_epoch: 0,
            best_val_loss: f64::NAN,
            initial_val_loss: f64::NAN,
            lr_trace: Vec::new(),
            train_loss_trace: Vec::new(),
            val_loss_trace: Vec::new(),
            best_val_trace: Vec::new(),
            stopped_early: false,
        }
    }
}

/// A trained (or explicitly constructed) network plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GraceModel {
    pub net: GraceNet,
    pub training: Option<TrainingSummary>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    variant: ModelVariant,
    config: NetConfig,
    layers: Vec<LayerRecord>,
    training: Option<TrainingSummary>,
}

impl GraceModel {
    pub fn new(net: GraceNet, training: Option<TrainingSummary>) -> Self {
        GraceModel { net, training }
    }

    /// An all-zero network marked as frozen; useful as a neutral reference.
    pub fn zeroed(variant: ModelVariant, config: &NetConfig) -> Result<Self> {
        Ok(GraceModel {
            net: GraceNet::zeroed(variant, config)?,
            training: Some(TrainingSummary::untrained()),
        })
    }

    pub fn variant(&self) -> ModelVariant {
        self.net.variant()
    }

    pub fn config(&self) -> &NetConfig {
        self.net.config()
    }

    pub fn is_trained(&self) -> bool {
        self.training.is_some()
    }

    /// Self-describing JSON: format tag, version, variant, config, every
    /// layer in declared order, training metadata.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            variant: self.net.variant,
            config: self.net.config.clone(),
            layers: self
                .net
                .layers
                .iter()
                .zip(&self.net.layout.names)
                .map(|(d, n)| LayerRecord::from_dense(n.clone(), d))
                .collect(),
            training: self.training.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| NetError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(NetError::Format(format!("unexpected format tag `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(NetError::UnsupportedVersion(file.version));
        }
        file.config.validate()?;
        let shapes = Layout::shapes(file.variant, &file.config);
        if shapes.len() != file.layers.len() {
            return Err(NetError::Format(format!(
                "expected {} layers, found {}",
                shapes.len(),
                file.layers.len()
            )));
        }
        let mut layers = Vec::with_capacity(shapes.len());
        for ((name, i, o), rec) in shapes.iter().zip(&file.layers) {
            if &rec.name != name || rec.inputs != *i || rec.outputs != *o {
                return Err(NetError::Format(format!(
                    "layer `{}` ({}×{}) does not match expected `{name}` ({i}×{o})",
                    rec.name, rec.inputs, rec.outputs
                )));
            }
            layers.push(
                rec.to_dense()
                    .ok_or_else(|| NetError::Format(format!("layer `{name}` has wrong length")))?,
            );
        }
        Ok(GraceModel {
            net: GraceNet {
                variant: file.variant,
                layout: Layout::new(file.variant, &file.config),
                config: file.config,
                layers,
            },
            training: file.training,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| NetError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| NetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}
