//! C4.5-style decision trees: gain-ratio splits on midpoint thresholds,
//! pessimistic error-based pruning. The growth routine is shared with the
//! random forest (per-node feature subsampling) and the logistic model
//! tree (early stop on node size).

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::model::{Model, Prediction, TrainingData};

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    assert!(total > 0.0, "entropy of all-zero counts");
    let mut h = 0.0;
    for &c in counts {
        if c > 0.0 {
            let p = c / total;
            h -= p * p.log2();
        }
    }
    h
}

#[derive(Debug, Clone)]
pub enum TreeNode {
    Leaf {
        counts: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        counts: Vec<f64>,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn counts(&self) -> &[f64] {
        match self {
            TreeNode::Leaf { counts } | TreeNode::Split { counts, .. } => counts,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Index of the leaf a feature vector routes to (left-to-right order).
    pub fn leaf_index(&self, features: &[f64]) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                if features[*feature] <= *threshold {
                    left.leaf_index(features)
                } else {
                    left.n_leaves() + right.leaf_index(features)
                }
            }
        }
    }

    pub fn leaf_for(&self, features: &[f64]) -> &TreeNode {
        match self {
            TreeNode::Leaf { .. } => self,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                if features[*feature] <= *threshold {
                    left.leaf_for(features)
                } else {
                    right.leaf_for(features)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct C45Params {
    /// Minimum samples per branch of an accepted split.
    pub min_leaf: usize,
    /// Pruning confidence factor.
    pub cf: f64,
    /// Skip pruning entirely (forest trees are unpruned).
    pub prune: bool,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 2,
            cf: 0.25,
            prune: true,
        }
    }
}

pub(crate) struct GrowControl<'a> {
    pub min_leaf: usize,
    /// Stop splitting nodes smaller than this (LMT uses it; 0 disables).
    pub min_split: usize,
    /// Consider only `m` random features per node when set.
    pub feature_sample: Option<(usize, &'a mut ChaCha8Rng)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain_ratio: f64,
}

fn class_counts(data: &TrainingData, idx: &[usize]) -> Vec<f64> {
    let mut counts = vec![0.0; data.n_classes()];
    for &i in idx {
        counts[data.y[i]] += 1.0;
    }
    counts
}

fn best_split_for_feature(
    data: &TrainingData,
    idx: &[usize],
    feature: usize,
    parent_entropy: f64,
    min_leaf: usize,
) -> Option<BestSplit> {
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| data.x[a][feature].partial_cmp(&data.x[b][feature]).unwrap());
    let n = order.len() as f64;
    let total = class_counts(data, idx);
    let mut left = vec![0.0; data.n_classes()];
    let mut best: Option<BestSplit> = None;
    for w in 0..order.len() - 1 {
        left[data.y[order[w]]] += 1.0;
        let (va, vb) = (data.x[order[w]][feature], data.x[order[w + 1]][feature]);
        if va == vb {
            continue;
        }
        let nl = (w + 1) as f64;
        let nr = n - nl;
        if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
            continue;
        }
        let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let gain = parent_entropy - (nl / n) * entropy(&left) - (nr / n) * entropy(&right);
        if gain <= 1e-12 {
            continue;
        }
        let split_info = -(nl / n) * (nl / n).log2() - (nr / n) * (nr / n).log2();
        if split_info <= 0.0 {
            continue;
        }
        let gain_ratio = gain / split_info;
        if best.as_ref().map_or(true, |b| gain_ratio > b.gain_ratio) {
            best = Some(BestSplit {
                feature,
                threshold: (va + vb) / 2.0,
                gain_ratio,
            });
        }
    }
    best
}

pub(crate) fn grow(data: &TrainingData, idx: &[usize], control: &mut GrowControl) -> TreeNode {
    let counts = class_counts(data, idx);
    let n_nonzero = counts.iter().filter(|&&c| c > 0.0).count();
    if n_nonzero <= 1 || idx.len() < control.min_split.max(2 * control.min_leaf) {
        return TreeNode::Leaf { counts };
    }
    let parent_entropy = entropy(&counts);
    let features: Vec<usize> = match &mut control.feature_sample {
        Some((m, rng)) => sample(rng, data.n_features(), (*m).min(data.n_features())).into_vec(),
        None => (0..data.n_features()).collect(),
    };
    let mut best: Option<BestSplit> = None;
    for &f in &features {
        if let Some(cand) = best_split_for_feature(data, idx, f, parent_entropy, control.min_leaf) {
            if best.as_ref().map_or(true, |b| cand.gain_ratio > b.gain_ratio) {
                best = Some(cand);
            }
        }
    }
    let Some(split) = best else {
        return TreeNode::Leaf { counts };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .copied()
        .partition(|&i| data.x[i][split.feature] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        counts,
        left: Box::new(grow(data, &left_idx, control)),
        right: Box::new(grow(data, &right_idx, control)),
    }
}

/// Upper confidence bound on the number of additional errors expected at
/// a node that made `e` errors on `n` training samples (the C4.5
/// pessimistic estimate).
pub(crate) fn add_errs(n: f64, e: f64, cf: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (add_errs(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - cf);
    let f = (e + 0.5) / n;
    let upper = (f + z * z / (2.0 * n)
        + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    (upper * n) - e
}

fn training_errors(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    total - counts.iter().cloned().fold(0.0, f64::max)
}

/// Pessimistic error estimate of a subtree (sum over its leaves).
pub(crate) fn pessimistic_errors(node: &TreeNode, cf: f64) -> f64 {
    match node {
        TreeNode::Leaf { counts } => {
            let n: f64 = counts.iter().sum();
            let e = training_errors(counts);
            e + add_errs(n, e, cf)
        }
        TreeNode::Split { left, right, .. } => {
            pessimistic_errors(left, cf) + pessimistic_errors(right, cf)
        }
    }
}

/// Bottom-up subtree replacement: collapse a split whenever the single
/// leaf's pessimistic estimate does not exceed the subtree's.
fn prune(node: TreeNode, cf: f64) -> TreeNode {
    match node {
        leaf @ TreeNode::Leaf { .. } => leaf,
        TreeNode::Split {
            feature,
            threshold,
            counts,
            left,
            right,
        } => {
            let left = prune(*left, cf);
            let right = prune(*right, cf);
            let subtree_est = pessimistic_errors(&left, cf) + pessimistic_errors(&right, cf);
            let n: f64 = counts.iter().sum();
            let e = training_errors(&counts);
            let leaf_est = e + add_errs(n, e, cf);
            if leaf_est <= subtree_est + 0.1 {
                TreeNode::Leaf { counts }
            } else {
                TreeNode::Split {
                    feature,
                    threshold,
                    counts,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecisionTreeModel {
    pub(crate) root: TreeNode,
    n_classes: usize,
}

pub fn train_c45(data: &TrainingData, params: &C45Params) -> Result<DecisionTreeModel> {
    let idx: Vec<usize> = (0..data.n_samples()).collect();
    let mut control = GrowControl {
        min_leaf: params.min_leaf,
        min_split: 0,
        feature_sample: None,
    };
    let mut root = grow(data, &idx, &mut control);
    if params.prune {
        root = prune(root, params.cf);
    }
    Ok(DecisionTreeModel {
        root,
        n_classes: data.n_classes(),
    })
}

impl Model for DecisionTreeModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let counts = self.root.leaf_for(features).counts();
        let total: f64 = counts.iter().sum();
        let probs = if total > 0.0 {
            counts.iter().map(|&c| c / total).collect()
        } else {
            vec![1.0 / self.n_classes as f64; self.n_classes]
        };
        Prediction::from_probs(probs)
    }
}

impl DecisionTreeModel {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn n_leaves(&self) -> usize {
        self.root.n_leaves()
    }

    /// Index of the leaf a sample routes to; stable for a fixed tree.
    pub fn leaf_assignment(&self, features: &[f64]) -> usize {
        self.root.leaf_index(features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn data_1d(values: &[f64], y: &[usize]) -> TrainingData {
        TrainingData {
            x: values.iter().map(|&v| vec![v]).collect(),
            y: y.to_vec(),
            classes: vec!["Tumor".into(), "Normal".into()],
        }
    }

    #[test]
    fn entropy_examples() {
        assert_relative_eq!(entropy(&[5.0, 5.0]), 1.0);
        assert_relative_eq!(entropy(&[10.0, 0.0]), 0.0);
        assert_relative_eq!(entropy(&[3.0, 1.0]), 0.8113, epsilon = 1e-4);
    }

    #[test]
    #[should_panic(expected = "all-zero")]
    fn entropy_rejects_zero_counts() {
        entropy(&[0.0, 0.0]);
    }

    #[test]
    fn threshold_separable_gives_depth_one() {
        let data = data_1d(&[1.0, 2.0, 3.0, 7.0, 8.0, 9.0], &[0, 0, 0, 1, 1, 1]);
        let model = train_c45(&data, &C45Params::default()).unwrap();
        assert_eq!(model.depth(), 1);
        for (x, &y) in data.x.iter().zip(&data.y) {
            assert_eq!(model.predict(x).class, y);
        }
    }

    #[test]
    fn pure_data_gives_single_leaf() {
        let data = data_1d(&[1.0, 5.0, 9.0], &[0, 0, 0]);
        let data = TrainingData {
            classes: vec!["Tumor".into(), "Normal".into()],
            ..data
        };
        let model = train_c45(&data, &C45Params::default()).unwrap();
        assert_eq!(model.n_leaves(), 1);
        assert_eq!(model.predict(&[3.0]).class, 0);
    }

    #[test]
    fn pruning_never_increases_pessimistic_estimate() {
        // noisy labels so the unpruned tree overfits
        let values: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y: Vec<usize> = (0..40).map(|i| if i % 7 == 0 { 1 } else { i / 20 }).collect();
        let data = data_1d(&values, &y);
        let unpruned = train_c45(
            &data,
            &C45Params {
                prune: false,
                ..C45Params::default()
            },
        )
        .unwrap();
        let pruned = train_c45(&data, &C45Params::default()).unwrap();
        let cf = 0.25;
        assert!(pessimistic_errors(&pruned.root, cf) <= pessimistic_errors(&unpruned.root, cf) + 1e-9);
        assert!(pruned.n_leaves() <= unpruned.n_leaves());
    }

    #[test]
    fn training_partition_invariant_under_monotone_transform() {
        let values = vec![3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3, 5.8, 9.7, 0.3];
        let y = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let data = data_1d(&values, &y);
        let transformed = data_1d(
            &values.iter().map(|&v| (v + 1.0).ln() * 3.0).collect::<Vec<_>>(),
            &y,
        );
        let m1 = train_c45(&data, &C45Params::default()).unwrap();
        let m2 = train_c45(&transformed, &C45Params::default()).unwrap();
        for (a, b) in data.x.iter().zip(&transformed.x) {
            assert_eq!(m1.root.leaf_index(a), m2.root.leaf_index(b));
            assert_eq!(m1.predict(a).class, m2.predict(b).class);
        }
    }

    #[test]
    fn add_errs_is_positive_and_decreasing_in_n() {
        let small = add_errs(10.0, 2.0, 0.25);
        let large = add_errs(100.0, 20.0, 0.25);
        assert!(small > 0.0);
        // same error rate, more evidence: fewer extra errors per sample
        assert!(large / 100.0 < small / 10.0);
    }
}
