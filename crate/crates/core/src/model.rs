//! Shared classifier contract: prediction type, sample-major training
//! view, equal-frequency discretizer, deterministic RNG streams, and the
//! probabilistic RMSE used in reports.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};
use crate::preprocess::quantile;

/// A class decision with its per-class probability vector.
///
/// The label is always the argmax of `probs`, ties broken by class order.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub probs: Vec<f64>,
}

impl Prediction {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        Prediction { class: best, probs }
    }
}

/// Sample-major view of a normalized dataset: one feature vector per
/// sample plus class indices. This is what every classifier trains on.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub classes: Vec<String>,
}

impl TrainingData {
    pub fn from_dataset(ds: &ExpressionDataset) -> Self {
        TrainingData {
            x: (0..ds.n_samples()).map(|s| ds.sample_column(s)).collect(),
            y: ds.label_indices().to_vec(),
            classes: ds.classes().to_vec(),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &y in &self.y {
            counts[y] += 1;
        }
        counts
    }
}

/// The shared predict contract every trained classifier satisfies.
pub trait Model: Send + Sync {
    fn predict(&self, features: &[f64]) -> Prediction;

    fn predict_all(&self, data: &TrainingData) -> Vec<Prediction> {
        data.x.iter().map(|x| self.predict(x)).collect()
    }
}

/// Equal-frequency discretizer: per-feature ascending cut points, values
/// map to the number of cut points strictly below them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    cuts: Vec<Vec<f64>>,
    k: usize,
}

impl Discretizer {
    pub fn fit(data: &TrainingData, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::config(format!("discretizer needs k >= 2, got {k}")));
        }
        let mut cuts = Vec::with_capacity(data.n_features());
        for f in 0..data.n_features() {
            let col: Vec<f64> = data.x.iter().map(|x| x[f]).collect();
            let col_min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut feature_cuts = Vec::new();
            for j in 1..k {
                let c = quantile(&col, j as f64 / k as f64)?;
                // collapse duplicate or non-separating cut points
                if c > col_min && feature_cuts.last().map_or(true, |&prev| c > prev) {
                    feature_cuts.push(c);
                }
            }
            cuts.push(feature_cuts);
        }
        Ok(Discretizer { cuts, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.cuts.len()
    }

    /// Number of bins actually realized for a feature (≤ k).
    pub fn n_bins(&self, feature: usize) -> usize {
        self.cuts[feature].len() + 1
    }

    pub fn bin(&self, feature: usize, value: f64) -> usize {
        self.cuts[feature].partition_point(|&c| c < value)
    }

    pub fn transform(&self, features: &[f64]) -> Vec<usize> {
        features
            .iter()
            .enumerate()
            .map(|(f, &v)| self.bin(f, v))
            .collect()
    }
}

/// Deterministic RNG streams: identical (master seed, stream id) yields
/// an identical sequence regardless of thread scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master: u64,
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        SeedSpec { master }
    }

    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(stream);
        rng
    }

    /// Stable stream id for a named consumer (FNV-1a over the name).
    pub fn stream_for(name: &str) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    pub fn rng_for(&self, name: &str) -> ChaCha8Rng {
        self.rng(Self::stream_for(name))
    }
}

/// RMSE over per-class probability vectors against one-hot truth:
/// sqrt((1/(N·K)) Σ_i Σ_k (p_ik − y_ik)²).
pub fn rmse_probabilistic(predictions: &[Prediction], truth: &[usize], n_classes: usize) -> Result<f64> {
    if predictions.len() != truth.len() || predictions.is_empty() {
        return Err(Error::Evaluation(format!(
            "rmse needs equal non-empty lengths, got {} predictions and {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let mut sum = 0.0;
    for (pred, &y) in predictions.iter().zip(truth) {
        for k in 0..n_classes {
            let target = if k == y { 1.0 } else { 0.0 };
            let p = pred.probs.get(k).copied().unwrap_or(0.0);
            sum += (p - target) * (p - target);
        }
    }
    Ok((sum / (predictions.len() * n_classes) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::RngCore;

    fn toy_data(cols: &[Vec<f64>], y: &[usize]) -> TrainingData {
        // cols are feature columns; build sample-major x
        let n = y.len();
        let x = (0..n)
            .map(|s| cols.iter().map(|c| c[s]).collect())
            .collect();
        TrainingData {
            x,
            y: y.to_vec(),
            classes: vec!["Tumor".into(), "Normal".into()],
        }
    }

    #[test]
    fn prediction_argmax_tie_break() {
        let p = Prediction::from_probs(vec![0.5, 0.5]);
        assert_eq!(p.class, 0);
        let p = Prediction::from_probs(vec![0.3, 0.7]);
        assert_eq!(p.class, 1);
    }

    #[test]
    fn discretizer_quartile_bins() {
        let col: Vec<f64> = (1..=8).map(f64::from).collect();
        let data = toy_data(&[col], &[0, 0, 0, 0, 1, 1, 1, 1]);
        let d = Discretizer::fit(&data, 4).unwrap();
        assert_eq!(d.n_bins(0), 4);
        let bins: Vec<usize> = (1..=8).map(|v| d.bin(0, v as f64)).collect();
        assert_eq!(bins, vec![0, 0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn discretizer_constant_feature_collapses() {
        let data = toy_data(&[vec![2.0; 6]], &[0, 0, 0, 1, 1, 1]);
        let d = Discretizer::fit(&data, 4).unwrap();
        assert_eq!(d.n_bins(0), 1);
        assert_eq!(d.bin(0, -100.0), 0);
        assert_eq!(d.bin(0, 100.0), 0);
    }

    #[test]
    fn discretizer_k2_cuts_at_median() {
        let col = vec![-3.0, -1.0, 1.0, 3.0];
        let data = toy_data(&[col], &[0, 0, 1, 1]);
        let d = Discretizer::fit(&data, 2).unwrap();
        assert_eq!(d.bin(0, -0.1), 0);
        assert_eq!(d.bin(0, 0.1), 1);
    }

    #[test]
    fn discretizer_rejects_small_k() {
        let data = toy_data(&[vec![1.0, 2.0]], &[0, 1]);
        assert!(Discretizer::fit(&data, 1).is_err());
    }

    #[test]
    fn discretizer_balanced_occupancy() {
        let col: Vec<f64> = (0..20).map(|i| i as f64 * 1.7 - 3.0).collect();
        let data = toy_data(&[col.clone()], &vec![0, 1].repeat(10));
        let d = Discretizer::fit(&data, 4).unwrap();
        let mut occupancy = vec![0usize; d.n_bins(0)];
        for &v in &col {
            occupancy[d.bin(0, v)] += 1;
        }
        let (min, max) = (
            *occupancy.iter().min().unwrap(),
            *occupancy.iter().max().unwrap(),
        );
        assert!(max - min <= 1, "{occupancy:?}");
    }

    #[test]
    fn seed_streams_deterministic_and_distinct() {
        let spec = SeedSpec::new(42);
        let a: Vec<u64> = (0..4).map(|_| spec.rng_for("mlp").next_u64()).collect();
        let b: Vec<u64> = (0..4).map(|_| spec.rng_for("mlp").next_u64()).collect();
        assert_eq!(a, b);
        let c: Vec<u64> = (0..4).map(|_| spec.rng_for("ga").next_u64()).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn rmse_examples() {
        let perfect = vec![
            Prediction::from_probs(vec![1.0, 0.0]),
            Prediction::from_probs(vec![0.0, 1.0]),
        ];
        assert_eq!(rmse_probabilistic(&perfect, &[0, 1], 2).unwrap(), 0.0);

        let half = vec![Prediction::from_probs(vec![0.5, 0.5]); 4];
        assert_relative_eq!(rmse_probabilistic(&half, &[0, 1, 0, 1], 2).unwrap(), 0.5);

        assert!(rmse_probabilistic(&half, &[0, 1], 2).is_err());
    }
}
