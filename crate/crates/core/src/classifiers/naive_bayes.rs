//! Gaussian Naive Bayes with log-space likelihoods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    /// Lower clamp on per-feature variances to keep likelihoods finite.
    pub variance_floor: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            variance_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NaiveBayesModel {
    log_priors: Vec<f64>,
    /// [class][feature]
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

pub fn train_naive_bayes(data: &TrainingData, params: &NaiveBayesParams) -> Result<NaiveBayesModel> {
    let k = data.n_classes();
    let f = data.n_features();
    let counts = data.class_counts();
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::training("naive-bayes", "a class has no training samples"));
    }
    let n = data.n_samples() as f64;
    let log_priors = counts.iter().map(|&c| (c as f64 / n).ln()).collect();

    let mut means = vec![vec![0.0; f]; k];
    for (x, &y) in data.x.iter().zip(&data.y) {
        for (j, &v) in x.iter().enumerate() {
            means[y][j] += v;
        }
    }
    for c in 0..k {
        for j in 0..f {
            means[c][j] /= counts[c] as f64;
        }
    }
    let mut variances = vec![vec![0.0; f]; k];
    for (x, &y) in data.x.iter().zip(&data.y) {
        for (j, &v) in x.iter().enumerate() {
            let d = v - means[y][j];
            variances[y][j] += d * d;
        }
    }
    for c in 0..k {
        let denom = if counts[c] > 1 { counts[c] - 1 } else { 1 } as f64;
        for j in 0..f {
            variances[c][j] = (variances[c][j] / denom).max(params.variance_floor);
        }
    }
    Ok(NaiveBayesModel {
        log_priors,
        means,
        variances,
    })
}

impl Model for NaiveBayesModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let k = self.log_priors.len();
        let mut log_post = vec![0.0; k];
        for c in 0..k {
            let mut lp = self.log_priors[c];
            for (j, &v) in features.iter().enumerate() {
                let var = self.variances[c][j];
                let d = v - self.means[c][j];
                lp += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
            }
            log_post[c] = lp;
        }
        Prediction::from_probs(normalize_log(&log_post))
    }
}

/// Exponentiate shifted log-scores and normalize to a probability vector.
pub(crate) fn normalize_log(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = log_scores.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}
