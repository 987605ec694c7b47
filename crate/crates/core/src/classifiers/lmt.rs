//! Simplified logistic model tree: a gain-ratio tree grown down to a
//! node-size floor, with a boosted additive logistic model at each leaf
//! (LogitBoost stages over one-feature linear regressors).

use serde::{Deserialize, Serialize};

use crate::classifiers::tree::{grow, GrowControl, TreeNode};
use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LmtParams {
    /// Maximum boosting stages per leaf model.
    pub max_boost_iters: usize,
    /// Nodes smaller than this are not split further.
    pub min_split: usize,
}

impl Default for LmtParams {
    fn default() -> Self {
        LmtParams {
            max_boost_iters: 50,
            min_split: 15,
        }
    }
}

/// Additive logistic model: intercept plus per-feature linear weights,
/// accumulated over boosting stages. p(class 1) = σ(2·F(x)).
#[derive(Debug, Clone, Default)]
struct LeafLogistic {
    bias: f64,
    weights: Vec<f64>,
}

impl LeafLogistic {
    fn score(&self, x: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(x)
                .map(|(&w, &v)| w * v)
                .sum::<f64>()
    }
}

/// One LogitBoost pass with simple (one-feature) weighted linear
/// regressors: each stage fits z ≈ a + b·x_j for the best single j.
fn fit_leaf_logistic(data: &TrainingData, idx: &[usize], iters: usize) -> LeafLogistic {
    const Z_MAX: f64 = 4.0;
    let mut model = LeafLogistic {
        bias: 0.0,
        weights: vec![0.0; data.n_features()],
    };
    let mut scores: Vec<f64> = vec![0.0; idx.len()];
    for _ in 0..iters {
        let mut z = vec![0.0; idx.len()];
        let mut w = vec![0.0; idx.len()];
        for (k, &i) in idx.iter().enumerate() {
            let p = 1.0 / (1.0 + (-2.0 * scores[k]).exp());
            let y_star = if data.y[i] == 1 { 1.0 } else { 0.0 };
            let wi = (p * (1.0 - p)).max(1e-10);
            w[k] = wi;
            z[k] = ((y_star - p) / wi).clamp(-Z_MAX, Z_MAX);
        }
        let w_total: f64 = w.iter().sum();
        let z_mean: f64 = w.iter().zip(&z).map(|(&wi, &zi)| wi * zi).sum::<f64>() / w_total;
        // pick the single feature with the largest weighted SSE reduction
        let mut best: Option<(f64, usize, f64, f64)> = None; // (reduction, feature, a, b)
        for f in 0..data.n_features() {
            let mut sx = 0.0;
            let mut sxx = 0.0;
            let mut sxz = 0.0;
            for (k, &i) in idx.iter().enumerate() {
                let v = data.x[i][f];
                sx += w[k] * v;
                sxx += w[k] * v * v;
                sxz += w[k] * v * z[k];
            }
            let x_mean = sx / w_total;
            let var = sxx - sx * x_mean;
            if var <= 1e-12 {
                continue;
            }
            let cov = sxz - z_mean * sx;
            let b = cov / var;
            let a = z_mean - b * x_mean;
            let reduction = cov * cov / var;
            if best.as_ref().map_or(true, |(r, ..)| reduction > *r) {
                best = Some((reduction, f, a, b));
            }
        }
        let (a, b, f) = match best {
            Some((_, f, a, b)) => (a, b, f),
            // all features constant in this leaf: intercept-only stage
            None => (z_mean, 0.0, 0),
        };
        model.bias += 0.5 * a;
        model.weights[f] += 0.5 * b;
        for (k, &i) in idx.iter().enumerate() {
            scores[k] += 0.5 * (a + b * data.x[i][f]);
        }
    }
    model
}

#[derive(Debug, Clone)]
pub struct LmtModel {
    root: TreeNode,
    /// One logistic model per leaf, in left-to-right leaf order.
    leaf_models: Vec<LeafLogistic>,
}

pub fn train_lmt(data: &TrainingData, params: &LmtParams) -> Result<LmtModel> {
    if data.n_samples() == 0 {
        return Err(Error::training("lmt", "empty training set"));
    }
    let idx: Vec<usize> = (0..data.n_samples()).collect();
    let mut control = GrowControl {
        min_leaf: 2,
        min_split: params.min_split,
        feature_sample: None,
    };
    let root = grow(data, &idx, &mut control);

    // group the training samples by leaf and fit one model per leaf
    let n_leaves = root.n_leaves();
    let mut per_leaf: Vec<Vec<usize>> = vec![Vec::new(); n_leaves];
    for &i in &idx {
        per_leaf[root.leaf_index(&data.x[i])].push(i);
    }
    let leaf_models = per_leaf
        .iter()
        .map(|leaf_idx| fit_leaf_logistic(data, leaf_idx, params.max_boost_iters))
        .collect();
    Ok(LmtModel { root, leaf_models })
}

impl Model for LmtModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let leaf = self.root.leaf_index(features);
        let p1 = 1.0 / (1.0 + (-2.0 * self.leaf_models[leaf].score(features)).exp());
        Prediction::from_probs(vec![1.0 - p1, p1])
    }
}

impl LmtModel {
    pub fn n_leaves(&self) -> usize {
        self.leaf_models.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_2d(n_per_class: usize) -> TrainingData {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n_per_class {
            let jitter = (i % 5) as f64 * 0.1;
            x.push(vec![-1.0 - jitter, -0.5 + jitter]);
            y.push(0);
            x.push(vec![1.0 + jitter, 0.5 - jitter]);
            y.push(1);
        }
        TrainingData {
            x,
            y,
            classes: vec!["Tumor".into(), "Normal".into()],
        }
    }

    #[test]
    fn single_leaf_logistic_separates() {
        let data = separable_2d(10);
        let params = LmtParams {
            max_boost_iters: 50,
            min_split: data.n_samples() + 1, // force a single leaf
        };
        let model = train_lmt(&data, &params).unwrap();
        assert_eq!(model.n_leaves(), 1);
        for (x, &yi) in data.x.iter().zip(&data.y) {
            assert_eq!(model.predict(x).class, yi);
        }
    }

    #[test]
    fn constant_labels_predict_that_class() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let data = TrainingData {
            x,
            y: vec![0; 12],
            classes: vec!["Tumor".into(), "Normal".into()],
        };
        let model = train_lmt(&data, &LmtParams::default()).unwrap();
        let pred = model.predict(&[3.0, 9.0]);
        assert_eq!(pred.class, 0);
        assert!(pred.probs[0] >= 1.0 - 1e-6, "probs {:?}", pred.probs);
    }

    #[test]
    fn leaf_probabilities_are_valid() {
        let data = separable_2d(8);
        let model = train_lmt(&data, &LmtParams::default()).unwrap();
        for x in &data.x {
            let pred = model.predict(x);
            let sum: f64 = pred.probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(pred.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }
}
