//! One-hidden-layer perceptron trained by backpropagation with squared
//! error, constant learning rate, and momentum.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 16,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    /// [hidden][input]
    pub w_hidden: Vec<Vec<f64>>,
    pub b_hidden: Vec<f64>,
    /// [output][hidden]
    pub w_out: Vec<Vec<f64>>,
    pub b_out: Vec<f64>,
    /// Training RMSE after the final epoch.
    pub train_rmse: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MlpModel {
    fn new(inputs: usize, hidden: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut init = |n| (0..n).map(|_| rng.random_range(-0.5..0.5)).collect::<Vec<f64>>();
        MlpModel {
            w_hidden: (0..hidden).map(|_| init(inputs)).collect(),
            b_hidden: init(hidden),
            w_out: (0..outputs).map(|_| init(hidden)).collect(),
            b_out: init(outputs),
            train_rmse: f64::NAN,
        }
    }

    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hidden: Vec<f64> = self
            .w_hidden
            .iter()
            .zip(&self.b_hidden)
            .map(|(w, &b)| sigmoid(w.iter().zip(x).map(|(&wi, &xi)| wi * xi).sum::<f64>() + b))
            .collect();
        let out: Vec<f64> = self
            .w_out
            .iter()
            .zip(&self.b_out)
            .map(|(w, &b)| sigmoid(w.iter().zip(&hidden).map(|(&wi, &hi)| wi * hi).sum::<f64>() + b))
            .collect();
        (hidden, out)
    }

    /// Mean squared-error loss 0.5·Σ(o−t)² over a batch of one-hot targets.
    pub fn batch_loss(&self, x: &[Vec<f64>], y: &[usize]) -> f64 {
        let mut loss = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            let (_, out) = self.forward(xi);
            for (k, &o) in out.iter().enumerate() {
                let t = if k == yi { 1.0 } else { 0.0 };
                loss += 0.5 * (o - t) * (o - t);
            }
        }
        loss
    }

    /// Analytic gradients of [`Self::batch_loss`], flattened in the order
    /// (w_hidden, b_hidden, w_out, b_out).
    pub fn batch_gradients(&self, x: &[Vec<f64>], y: &[usize]) -> Vec<f64> {
        let mut gw_hidden = vec![vec![0.0; self.w_hidden[0].len()]; self.w_hidden.len()];
        let mut gb_hidden = vec![0.0; self.b_hidden.len()];
        let mut gw_out = vec![vec![0.0; self.w_out[0].len()]; self.w_out.len()];
        let mut gb_out = vec![0.0; self.b_out.len()];
        for (xi, &yi) in x.iter().zip(y) {
            let (hidden, out) = self.forward(xi);
            let delta_out: Vec<f64> = out
                .iter()
                .enumerate()
                .map(|(k, &o)| {
                    let t = if k == yi { 1.0 } else { 0.0 };
                    (o - t) * o * (1.0 - o)
                })
                .collect();
            for (k, &d) in delta_out.iter().enumerate() {
                for (h, &hv) in hidden.iter().enumerate() {
                    gw_out[k][h] += d * hv;
                }
                gb_out[k] += d;
            }
            for (h, &hv) in hidden.iter().enumerate() {
                let upstream: f64 = delta_out
                    .iter()
                    .enumerate()
                    .map(|(k, &d)| d * self.w_out[k][h])
                    .sum();
                let d_h = upstream * hv * (1.0 - hv);
                for (j, &xv) in xi.iter().enumerate() {
                    gw_hidden[h][j] += d_h * xv;
                }
                gb_hidden[h] += d_h;
            }
        }
        let mut flat = Vec::new();
        flat.extend(gw_hidden.into_iter().flatten());
        flat.extend(gb_hidden);
        flat.extend(gw_out.into_iter().flatten());
        flat.extend(gb_out);
        flat
    }

    /// Flat mutable view matching [`Self::batch_gradients`] order.
    pub fn parameters_mut(&mut self) -> Vec<&mut f64> {
        let mut refs: Vec<&mut f64> = Vec::new();
        for row in &mut self.w_hidden {
            refs.extend(row.iter_mut());
        }
        refs.extend(self.b_hidden.iter_mut());
        for row in &mut self.w_out {
            refs.extend(row.iter_mut());
        }
        refs.extend(self.b_out.iter_mut());
        refs
    }
}

pub fn train_mlp(data: &TrainingData, params: &MlpParams, rng: &mut ChaCha8Rng) -> Result<MlpModel> {
    if params.hidden < 1 || params.epochs < 1 {
        return Err(Error::training("mlp", "hidden and epochs must be >= 1"));
    }
    let k = data.n_classes();
    let mut model = MlpModel::new(data.n_features(), params.hidden, k, rng);
    let mut velocity = vec![0.0; model.batch_gradients(&data.x[..1], &data.y[..1]).len()];
    let mut order: Vec<usize> = (0..data.n_samples()).collect();
    for _ in 0..params.epochs {
        order.shuffle(rng);
        for &i in &order {
            let grads = model.batch_gradients(std::slice::from_ref(&data.x[i]), &data.y[i..=i]);
            let mut params_flat = model.parameters_mut();
            for (p, (g, v)) in params_flat.iter_mut().zip(grads.iter().zip(velocity.iter_mut())) {
                *v = params.momentum * *v - params.learning_rate * g;
                **p += *v;
            }
        }
    }
    let mut se = 0.0;
    for (xi, &yi) in data.x.iter().zip(&data.y) {
        let (_, out) = model.forward(xi);
        for (c, &o) in out.iter().enumerate() {
            let t = if c == yi { 1.0 } else { 0.0 };
            se += (o - t) * (o - t);
        }
    }
    model.train_rmse = (se / (data.n_samples() * k) as f64).sqrt();
    Ok(model)
}

impl Model for MlpModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let (_, out) = self.forward(features);
        let sum: f64 = out.iter().sum();
        let probs = if sum > 0.0 {
            out.iter().map(|&o| o / sum).collect()
        } else {
            vec![1.0 / out.len() as f64; out.len()]
        };
        Prediction::from_probs(probs)
    }
}
