//! Linear soft-margin SVM trained with Platt's SMO: analytic updates of
//! one multiplier pair at a time until no KKT violator remains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SvmParams {
    /// Box constraint.
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Consecutive violation-free sweeps required to stop.
    pub max_passes: usize,
    /// Slope of the logistic squashing that turns margins into the
    /// probability output (reporting only; the decision is the sign).
    pub prob_slope: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10,
            prob_slope: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    /// Training labels in ±1 encoding (class 0 → +1).
    pub labels: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    prob_slope: f64,
    /// Margin of a sample: w·x + b.
    single_class: Option<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn train_smo_svm(data: &TrainingData, params: &SvmParams) -> Result<SvmModel> {
    if data.n_classes() != 2 {
        return Err(Error::training("smo-svm", "binary labels required"));
    }
    if params.c <= 0.0 {
        return Err(Error::training("smo-svm", "C must be positive"));
    }
    let counts = data.class_counts();
    if let Some(only) = counts.iter().position(|&c| c == data.n_samples()) {
        // all samples in one class: no separating problem to solve
        return Ok(SvmModel {
            alphas: vec![0.0; data.n_samples()],
            labels: Vec::new(),
            weights: vec![0.0; data.n_features()],
            bias: 0.0,
            prob_slope: params.prob_slope,
            single_class: Some(only),
        });
    }

    let n = data.n_samples();
    let y: Vec<f64> = data.y.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
    let mut alphas = vec![0.0; n];
    let mut w = vec![0.0; data.n_features()];
    let mut b = 0.0;
    let c = params.c;
    let tol = params.tol;

    let margin = |w: &[f64], b: f64, x: &[f64]| dot(w, x) + b;

    let mut clean_sweeps = 0usize;
    let mut examine_all = true;
    // hard cap so pathological data cannot spin forever
    let max_iters = 200 * n.max(1);
    let mut iters = 0usize;
    while clean_sweeps < params.max_passes && iters < max_iters {
        iters += 1;
        let mut changed = 0usize;
        for i in 0..n {
            if !examine_all && (alphas[i] <= 0.0 || alphas[i] >= c) {
                continue;
            }
            let e_i = margin(&w, b, &data.x[i]) - y[i];
            let violates = (y[i] * e_i < -tol && alphas[i] < c) || (y[i] * e_i > tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            // second multiplier: the classic |E_i - E_j| heuristic first,
            // then fall back to every other index so a rejected step
            // cannot stall the sweep while violators remain
            let mut j_best = None;
            let mut gap_best = -1.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let e_j = margin(&w, b, &data.x[j]) - y[j];
                let gap = (e_i - e_j).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = Some(j);
                }
            }
            let Some(j_best) = j_best else { continue };
            let candidates = std::iter::once(j_best).chain((0..n).filter(|&j| j != i && j != j_best));
            for j in candidates {
                let e_j = margin(&w, b, &data.x[j]) - y[j];
                let (alpha_i_old, alpha_j_old) = (alphas[i], alphas[j]);
                let (lo, hi) = if y[i] != y[j] {
                    (
                        (alpha_j_old - alpha_i_old).max(0.0),
                        (c + alpha_j_old - alpha_i_old).min(c),
                    )
                } else {
                    (
                        (alpha_i_old + alpha_j_old - c).max(0.0),
                        (alpha_i_old + alpha_j_old).min(c),
                    )
                };
                if lo >= hi {
                    continue;
                }
                let k_ii = dot(&data.x[i], &data.x[i]);
                let k_jj = dot(&data.x[j], &data.x[j]);
                let k_ij = dot(&data.x[i], &data.x[j]);
                let eta = 2.0 * k_ij - k_ii - k_jj;
                if eta >= 0.0 {
                    continue;
                }
                let mut alpha_j = alpha_j_old - y[j] * (e_i - e_j) / eta;
                alpha_j = alpha_j.clamp(lo, hi);
                if (alpha_j - alpha_j_old).abs() < 1e-7 {
                    continue;
                }
                let alpha_i = alpha_i_old + y[i] * y[j] * (alpha_j_old - alpha_j);

                // linear kernel: maintain w incrementally
                for (wf, (&xi, &xj)) in w.iter_mut().zip(data.x[i].iter().zip(&data.x[j])) {
                    *wf += y[i] * (alpha_i - alpha_i_old) * xi + y[j] * (alpha_j - alpha_j_old) * xj;
                }
                let b1 = b - e_i
                    - y[i] * (alpha_i - alpha_i_old) * k_ii
                    - y[j] * (alpha_j - alpha_j_old) * k_ij;
                let b2 = b - e_j
                    - y[i] * (alpha_i - alpha_i_old) * k_ij
                    - y[j] * (alpha_j - alpha_j_old) * k_jj;
                b = if alpha_i > 0.0 && alpha_i < c {
                    b1
                } else if alpha_j > 0.0 && alpha_j < c {
                    b2
                } else {
                    (b1 + b2) / 2.0
                };
                alphas[i] = alpha_i;
                alphas[j] = alpha_j;
                changed += 1;
                break;
            }
        }
        if changed == 0 {
            if examine_all {
                clean_sweeps += 1;
            } else {
                examine_all = true;
            }
        } else {
            clean_sweeps = 0;
            examine_all = false;
        }
    }

    Ok(SvmModel {
        alphas,
        labels: y,
        weights: w,
        bias: b,
        prob_slope: params.prob_slope,
        single_class: None,
    })
}

impl SvmModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// Σ αᵢ yᵢ, zero at any dual-feasible point.
    pub fn equality_residual(&self) -> f64 {
        self.alphas.iter().zip(&self.labels).map(|(&a, &y)| a * y).sum()
    }

    /// Worst KKT violation over the training set. Multipliers within
    /// 1e-8 of a box bound count as bound, not interior.
    pub fn max_kkt_violation(&self, data: &TrainingData, c: f64) -> f64 {
        let eps = 1e-8;
        let mut worst: f64 = 0.0;
        for (i, x) in data.x.iter().enumerate() {
            let y = self.labels[i];
            let m = y * self.margin(x);
            let a = self.alphas[i];
            let violation = if a <= eps {
                (1.0 - m).max(0.0) // should satisfy m >= 1
            } else if a >= c - eps {
                (m - 1.0).max(0.0) // should satisfy m <= 1
            } else {
                (m - 1.0).abs() // on the margin
            };
            worst = worst.max(violation);
        }
        worst
    }
}

impl Model for SvmModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        if let Some(only) = self.single_class {
            let mut probs = vec![0.0; 2];
            probs[only] = 1.0;
            return Prediction::from_probs(probs);
        }
        let m = self.margin(features);
        // class 0 encoded +1, so positive margins favor class 0
        let p0 = 1.0 / (1.0 + (-self.prob_slope * m).exp());
        Prediction::from_probs(vec![p0, 1.0 - p0])
    }
}
