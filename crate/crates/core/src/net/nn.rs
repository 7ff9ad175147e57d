//! Dense layers and the Adam optimizer, shared by the autoencoders and the
//! MLP certainty classifier.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fully connected layer `y = x · W + b`, with `W` stored `inputs × outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            w: Array2::zeros((inputs, outputs)),
            b: Array1::zeros(outputs),
        }
    }

    /// He-style uniform initialization: `W ~ U(-√(6/fan_in), √(6/fan_in))`, `b = 0`.
    pub fn he_uniform(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / inputs.max(1) as f64).sqrt();
        Dense {
            w: Array2::from_shape_fn((inputs, outputs), |_| rng.random_range(-bound..=bound)),
            b: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    /// Accumulates `∂L/∂W` and `∂L/∂b` into `grad` and returns `∂L/∂x`.
    pub fn backward(&self, x: &ArrayView2<f64>, dy: &Array2<f64>, grad: &mut Dense) -> Array2<f64> {
        grad.w += &x.t().dot(dy);
        grad.b += &dy.sum_axis(Axis(0));
        dy.dot(&self.w.t())
    }

    /// Parameter `i` in declared order: weights row-major, then biases.
    pub fn param(&self, i: usize) -> f64 {
        if i < self.w.len() {
            self.w[(i / self.w.ncols(), i % self.w.ncols())]
        } else {
            self.b[i - self.w.len()]
        }
    }

    pub fn param_mut(&mut self, i: usize) -> &mut f64 {
        if i < self.w.len() {
            let c = self.w.ncols();
            &mut self.w[(i / c, i % c)]
        } else {
            let n = self.w.len();
            &mut self.b[i - n]
        }
    }

    pub fn zeros_like(&self) -> Self {
        Dense::zeros(self.inputs(), self.outputs())
    }
}

pub fn relu_inplace(x: &mut Array2<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

/// Zeroes `dy` where the ReLU output was not positive.
pub fn relu_backward(dy: &mut Array2<f64>, out: &Array2<f64>) {
    ndarray::Zip::from(dy).and(out).for_each(|d, &o| {
        if o <= 0.0 {
            *d = 0.0;
        }
    });
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// L2 penalty added to the gradient before the moment updates.
    pub weight_decay: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-8,
        }
    }
}

/// Adam with bias correction over a list of dense layers.
#[derive(Debug, Clone)]
pub struct Adam {
    params: AdamParams,
    m: Vec<Dense>,
    v: Vec<Dense>,
    t: i32,
}

impl Adam {
    pub fn new(params: AdamParams, layers: &[Dense]) -> Self {
        Adam {
            params,
            m: layers.iter().map(Dense::zeros_like).collect(),
            v: layers.iter().map(Dense::zeros_like).collect(),
            t: 0,
        }
    }

    pub fn step(&mut self, layers: &mut [Dense], grads: &[Dense], lr: f64) {
        self.t += 1;
        let AdamParams {
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.params;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            let g = g + weight_decay * *p;
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((layer, grad), m), v) in layers
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::Zip::from(&mut layer.w)
                .and(&grad.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .for_each(|p, &g, m, v| update(p, g, m, v));
            ndarray::Zip::from(&mut layer.b)
                .and(&grad.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .for_each(|p, &g, m, v| update(p, g, m, v));
        }
    }
}

/// Serialized layer: row-major weights (`inputs × outputs`) and biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerRecord {
    pub fn from_dense(name: impl Into<String>, d: &Dense) -> Self {
        LayerRecord {
            name: name.into(),
            inputs: d.inputs(),
            outputs: d.outputs(),
            weights: d.w.iter().copied().collect(),
            bias: d.b.to_vec(),
        }
    }

    pub fn to_dense(&self) -> Option<Dense> {
        if self.bias.len() != self.outputs {
            return None;
        }
        Some(Dense {
            w: Array2::from_shape_vec((self.inputs, self.outputs), self.weights.clone()).ok()?,
            b: Array1::from(self.bias.clone()),
        })
    }
}
