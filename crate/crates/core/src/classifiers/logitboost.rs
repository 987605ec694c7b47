//! Two-class LogitBoost with regression stumps as base learners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogitBoostParams {
    /// Number of boosting stages.
    pub stages: usize,
    /// Shrinkage applied to every stage.
    pub shrinkage: f64,
    /// Clamp on the working responses.
    pub z_max: f64,
}

impl Default for LogitBoostParams {
    fn default() -> Self {
        LogitBoostParams {
            stages: 100,
            shrinkage: 1.0,
            z_max: 4.0,
        }
    }
}

/// Depth-1 regressor; `left`/`right` already carry the ν/2 stage scaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: f64,
    pub right: f64,
}

impl Stump {
    fn value(&self, x: &[f64]) -> f64 {
        if x[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogitBoostModel {
    stumps: Vec<Stump>,
    /// Bernoulli deviance on the training set after each stage.
    pub deviance_trace: Vec<f64>,
}

/// Weighted least-squares stump for responses z with weights w.
fn fit_stump(data: &TrainingData, z: &[f64], w: &[f64]) -> Stump {
    let n = data.n_samples();
    let w_total: f64 = w.iter().sum();
    let wz_total: f64 = w.iter().zip(z).map(|(&wi, &zi)| wi * zi).sum();
    let grand_mean = if w_total > 0.0 { wz_total / w_total } else { 0.0 };

    // score = Sl^2/Wl + Sr^2/Wr, larger is a bigger SSE reduction
    let mut best: Option<(f64, Stump)> = None;
    for f in 0..data.n_features() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| data.x[a][f].partial_cmp(&data.x[b][f]).unwrap());
        let mut wl = 0.0;
        let mut sl = 0.0;
        for cut in 0..n - 1 {
            let i = order[cut];
            wl += w[i];
            sl += w[i] * z[i];
            let (va, vb) = (data.x[order[cut]][f], data.x[order[cut + 1]][f]);
            if va == vb {
                continue;
            }
            let wr = w_total - wl;
            let sr = wz_total - sl;
            if wl <= 0.0 || wr <= 0.0 {
                continue;
            }
            let score = sl * sl / wl + sr * sr / wr;
            if best.as_ref().map_or(true, |(s, _)| score > *s) {
                best = Some((
                    score,
                    Stump {
                        feature: f,
                        threshold: (va + vb) / 2.0,
                        left: sl / wl,
                        right: sr / wr,
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s).unwrap_or(Stump {
        // all features constant: fit the weighted mean on both sides
        feature: 0,
        threshold: f64::INFINITY,
        left: grand_mean,
        right: grand_mean,
    })
}

fn deviance(scores: &[f64], y: &[usize]) -> f64 {
    scores
        .iter()
        .zip(y)
        .map(|(&f_i, &yi)| {
            // p = e^F / (e^F + e^-F); stable Bernoulli deviance in logits
            let margin = if yi == 1 { 2.0 * f_i } else { -2.0 * f_i };
            (1.0 + (-margin).exp()).ln()
        })
        .sum()
}

pub fn train_logitboost(data: &TrainingData, params: &LogitBoostParams) -> Result<LogitBoostModel> {
    if params.stages < 1 {
        return Err(Error::training("logit-boost", "stages must be >= 1"));
    }
    if data.n_classes() != 2 {
        return Err(Error::training("logit-boost", "binary labels required"));
    }
    let n = data.n_samples();
    let mut scores = vec![0.0f64; n];
    let mut stumps = Vec::with_capacity(params.stages);
    let mut deviance_trace = Vec::with_capacity(params.stages);
    for _ in 0..params.stages {
        let mut z = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let p = 1.0 / (1.0 + (-2.0 * scores[i]).exp());
            let y_star = if data.y[i] == 1 { 1.0 } else { 0.0 };
            let wi = (p * (1.0 - p)).max(1e-10);
            w[i] = wi;
            z[i] = ((y_star - p) / wi).clamp(-params.z_max, params.z_max);
        }
        let mut stump = fit_stump(data, &z, &w);
        let scale = 0.5 * params.shrinkage;
        stump.left *= scale;
        stump.right *= scale;
        // Newton steps can overshoot on clamped responses; halve the
        // contribution until the deviance stops rising so the trace is
        // monotone non-increasing
        let before = deviance(&scores, &data.y);
        let trial = |stump: &Stump| {
            let next: Vec<f64> = scores
                .iter()
                .enumerate()
                .map(|(i, &f_i)| f_i + stump.value(&data.x[i]))
                .collect();
            let d = deviance(&next, &data.y);
            (next, d)
        };
        let (mut next, mut after) = trial(&stump);
        let mut halvings = 0;
        while after > before && halvings < 30 {
            stump.left *= 0.5;
            stump.right *= 0.5;
            (next, after) = trial(&stump);
            halvings += 1;
        }
        if after > before {
            stump.left = 0.0;
            stump.right = 0.0;
            next = scores.clone();
            after = before;
        }
        scores = next;
        deviance_trace.push(after);
        stumps.push(stump);
    }
    Ok(LogitBoostModel {
        stumps,
        deviance_trace,
    })
}

impl Model for LogitBoostModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let f_score: f64 = self.stumps.iter().map(|s| s.value(features)).sum();
        let p1 = 1.0 / (1.0 + (-2.0 * f_score).exp());
        Prediction::from_probs(vec![1.0 - p1, p1])
    }
}
