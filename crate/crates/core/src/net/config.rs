use serde::{Deserialize, Serialize};

use super::nn::AdamParams;
use super::NetError;

/// Output mapping of the score head on the internal `[0, 1]` scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreHead {
    /// Logistic squashing; outputs are in range by construction.
    Logistic,
    /// Affine output, clamped only at inference.
    Linear,
}

/// Architecture, loss and optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    /// Number of actions (score dimensions).
    pub n: usize,
    /// Number of explanation categories.
    pub m: usize,
    /// Width of each input branch (score encoder, explanation encoder).
    pub branch_dim: usize,
    /// Shared encoder widths; the decoder mirrors them in reverse.
    pub shared_dims: Vec<usize>,
    pub latent_dim: usize,
    /// Weight of the score MSE; the explanation BCE gets `1 − alpha`.
    pub alpha: f64,
    pub lr: f64,
    pub lr_decay_factor: f64,
    pub lr_patience_epochs: usize,
    /// Rows per mini-batch (a GRACE row contributes one sample per condition).
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_epsilon: f64,
    pub early_stop_patience: usize,
    pub adam: AdamParams,
    pub score_head: ScoreHead,
    /// Salt-and-pepper probability for the denoising variants.
    pub noise_prob: f64,
    /// KL weight of the variational baseline.
    pub kl_weight: f64,
    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            n: 9,
            m: 7,
            branch_dim: 64,
            shared_dims: vec![256, 64],
            latent_dim: 32,
            alpha: 0.6,
            lr: 1e-3,
            lr_decay_factor: 0.3,
            lr_patience_epochs: 10,
            batch_size: 32,
            max_epochs: 200,
            early_stop_epsilon: 1e-4,
            early_stop_patience: 20,
            adam: AdamParams::default(),
            score_head: ScoreHead::Logistic,
            noise_prob: 0.2,
            kl_weight: 1.0,
            seed: 0,
        }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: String| Err(NetError::InvalidConfig(m));
        if self.n == 0 || self.m == 0 || self.branch_dim == 0 || self.latent_dim == 0 {
            return bad("all dimensions must be at least 1".into());
        }
        if self.shared_dims.is_empty() || self.shared_dims.contains(&0) {
            return bad("shared_dims must be non-empty with positive widths".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.noise_prob) {
            return bad(format!("noise_prob {} outside [0, 1]", self.noise_prob));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return bad("batch_size and max_epochs must be positive".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("lr must be finite and non-negative".into());
        }
        Ok(())
    }
}
