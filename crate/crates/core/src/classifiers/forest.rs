//! Random forest: bootstrap-aggregated unpruned gain-ratio trees with
//! per-node feature subsampling; prediction by majority vote.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::tree::{grow, GrowControl, TreeNode};
use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RandomForestParams {
    /// Number of trees.
    pub trees: usize,
    /// Features considered per split; 0 means ⌈sqrt(#features)⌉.
    pub features_per_split: usize,
    /// Bootstrap resampling of the training rows (on by default; the
    /// single-tree degeneration uses the full sample).
    pub bootstrap: bool,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        RandomForestParams {
            trees: 100,
            features_per_split: 0,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomForestModel {
    trees: Vec<TreeNode>,
    n_classes: usize,
}

pub fn train_random_forest(
    data: &TrainingData,
    params: &RandomForestParams,
    rng: &mut ChaCha8Rng,
) -> Result<RandomForestModel> {
    if params.trees < 1 {
        return Err(Error::training("random-forest", "trees must be >= 1"));
    }
    let n_features = data.n_features();
    let m = if params.features_per_split == 0 {
        (n_features as f64).sqrt().ceil() as usize
    } else {
        params.features_per_split
    };
    if m < 1 || m > n_features {
        return Err(Error::training(
            "random-forest",
            format!("features_per_split {m} outside 1..={n_features}"),
        ));
    }
    let n = data.n_samples();
    // derive an independent seed per tree so parallel training is
    // deterministic regardless of scheduling
    let tree_seeds: Vec<u64> = (0..params.trees).map(|_| rng.random()).collect();
    let trees: Vec<TreeNode> = tree_seeds
        .par_iter()
        .map(|&seed| {
            let mut tree_rng = ChaCha8Rng::seed_from_u64(seed);
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| tree_rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut control = GrowControl {
                min_leaf: 1,
                min_split: 0,
                feature_sample: Some((m, &mut tree_rng)),
            };
            grow(data, &idx, &mut control)
        })
        .collect();
    Ok(RandomForestModel {
        trees,
        n_classes: data.n_classes(),
    })
}

impl Model for RandomForestModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let mut votes = vec![0.0; self.n_classes];
        for tree in &self.trees {
            let counts = tree.leaf_for(features).counts();
            let mut best = 0;
            for (c, &v) in counts.iter().enumerate() {
                if v > counts[best] {
                    best = c;
                }
            }
            votes[best] += 1.0;
        }
        let total: f64 = votes.iter().sum();
        Prediction::from_probs(votes.iter().map(|&v| v / total).collect())
    }
}

impl RandomForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}
