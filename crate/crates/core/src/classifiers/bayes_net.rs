//! Bayes network classifier over discretized features.
//!
//! Structure search is greedy hill-climbing over feature-to-feature edge
//! additions, removals, and reversals, starting from the naive structure
//! (class node parent of every feature), scored by BIC on the discretized
//! training data. CPTs are Laplace-smoothed counts.

use serde::{Deserialize, Serialize};

use crate::classifiers::naive_bayes::normalize_log;
use crate::error::{Error, Result};
use crate::model::{Discretizer, Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BayesNetParams {
    /// Equal-frequency discretization bins.
    pub k: usize,
    /// Maximum parents per feature node, the class parent included.
    pub max_parents: usize,
    /// Equivalent sample size for CPT smoothing.
    pub ess: f64,
}

impl Default for BayesNetParams {
    fn default() -> Self {
        BayesNetParams {
            k: 4,
            max_parents: 2,
            ess: 1.0,
        }
    }
}

/// Parent of a feature node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parent {
    Class,
    Feature(usize),
}

#[derive(Debug, Clone)]
struct FeatureNode {
    /// Ordered parent list; the class is always present.
    parents: Vec<Parent>,
    /// [parent config (mixed radix over parents)][state]
    cpt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BayesNetModel {
    discretizer: Discretizer,
    priors: Vec<f64>,
    nodes: Vec<FeatureNode>,
    n_classes: usize,
}

/// Discretized training matrix plus cardinalities; the working form for
/// counting and scoring.
struct DiscreteData {
    /// [sample][feature]
    bins: Vec<Vec<usize>>,
    y: Vec<usize>,
    cards: Vec<usize>,
    n_classes: usize,
}

impl DiscreteData {
    fn parent_card(&self, p: Parent) -> usize {
        match p {
            Parent::Class => self.n_classes,
            Parent::Feature(f) => self.cards[f],
        }
    }

    fn parent_value(&self, p: Parent, sample: usize) -> usize {
        match p {
            Parent::Class => self.y[sample],
            Parent::Feature(f) => self.bins[sample][f],
        }
    }

    /// Counts N[parent config][state] for one family.
    fn family_counts(&self, feature: usize, parents: &[Parent]) -> (Vec<Vec<f64>>, usize) {
        let q: usize = parents.iter().map(|&p| self.parent_card(p)).product();
        let r = self.cards[feature];
        let mut counts = vec![vec![0.0; r]; q.max(1)];
        for s in 0..self.y.len() {
            let mut idx = 0;
            for &p in parents {
                idx = idx * self.parent_card(p) + self.parent_value(p, s);
            }
            counts[idx][self.bins[s][feature]] += 1.0;
        }
        (counts, r)
    }

    /// BIC family score: log-likelihood minus (ln N / 2) · q(r−1).
    fn family_score(&self, feature: usize, parents: &[Parent]) -> f64 {
        let (counts, r) = self.family_counts(feature, parents);
        let mut loglik = 0.0;
        for row in &counts {
            let total: f64 = row.iter().sum();
            if total == 0.0 {
                continue;
            }
            for &c in row {
                if c > 0.0 {
                    loglik += c * (c / total).ln();
                }
            }
        }
        let n = self.y.len() as f64;
        loglik - 0.5 * n.ln() * (counts.len() * (r - 1)) as f64
    }
}

/// Feature-to-feature edges only; `parents[b]` lists feature parents of b.
fn has_path(parents: &[Vec<usize>], from: usize, to: usize) -> bool {
    // DFS along child -> parent direction: is `to` an ancestor of `from`?
    let mut stack = vec![from];
    let mut seen = vec![false; parents.len()];
    while let Some(node) = stack.pop() {
        if node == to {
            return true;
        }
        if std::mem::replace(&mut seen[node], true) {
            continue;
        }
        stack.extend(parents[node].iter().copied());
    }
    false
}

pub fn train_bayes_net(data: &TrainingData, params: &BayesNetParams) -> Result<BayesNetModel> {
    if data.class_counts().iter().any(|&c| c == 0) {
        return Err(Error::training("bayes-net", "a class has no training samples"));
    }
    if params.max_parents < 1 {
        return Err(Error::training(
            "bayes-net",
            "max_parents must be at least 1 (the class parent)",
        ));
    }
    let discretizer = Discretizer::fit(data, params.k)?;
    let n_features = data.n_features();
    let dd = DiscreteData {
        bins: data.x.iter().map(|x| discretizer.transform(x)).collect(),
        y: data.y.clone(),
        cards: (0..n_features).map(|f| discretizer.n_bins(f)).collect(),
        n_classes: data.n_classes(),
    };

    // naive start: every feature's sole parent is the class
    let mut feature_parents: Vec<Vec<usize>> = vec![Vec::new(); n_features];
    let mut scores: Vec<f64> = (0..n_features)
        .map(|f| dd.family_score(f, &[Parent::Class]))
        .collect();

    let full_parents = |fp: &[Vec<usize>], f: usize| -> Vec<Parent> {
        let mut ps = vec![Parent::Class];
        ps.extend(fp[f].iter().map(|&p| Parent::Feature(p)));
        ps
    };

    loop {
        let mut best: Option<(f64, Move)> = None;
        for a in 0..n_features {
            for b in 0..n_features {
                if a == b {
                    continue;
                }
                let exists = feature_parents[b].contains(&a);
                if exists {
                    // remove a -> b
                    let mut ps = full_parents(&feature_parents, b);
                    ps.retain(|&p| p != Parent::Feature(a));
                    let delta = dd.family_score(b, &ps) - scores[b];
                    if best.as_ref().map_or(delta > 1e-9, |(d, _)| delta > *d) {
                        best = Some((delta, Move::Remove(a, b)));
                    }
                    // reverse a -> b into b -> a
                    if feature_parents[a].len() + 1 < params.max_parents {
                        let mut fp = feature_parents.clone();
                        fp[b].retain(|&p| p != a);
                        if !has_path(&fp, b, a) {
                            fp[a].push(b);
                            let delta = (dd.family_score(b, &full_parents(&fp, b)) - scores[b])
                                + (dd.family_score(a, &full_parents(&fp, a)) - scores[a]);
                            if best.as_ref().map_or(delta > 1e-9, |(d, _)| delta > *d) {
                                best = Some((delta, Move::Reverse(a, b)));
                            }
                        }
                    }
                } else if feature_parents[b].len() + 1 < params.max_parents
                    && !has_path(&feature_parents, a, b)
                {
                    // add a -> b; acyclic iff a is not a descendant of b,
                    // i.e. b is not reachable from a along parent links
                    let mut ps = full_parents(&feature_parents, b);
                    ps.push(Parent::Feature(a));
                    let delta = dd.family_score(b, &ps) - scores[b];
                    if best.as_ref().map_or(delta > 1e-9, |(d, _)| delta > *d) {
                        best = Some((delta, Move::Add(a, b)));
                    }
                }
            }
        }
        match best {
            None => break,
            Some((_, mv)) => {
                match mv {
                    Move::Add(a, b) => feature_parents[b].push(a),
                    Move::Remove(a, b) => feature_parents[b].retain(|&p| p != a),
                    Move::Reverse(a, b) => {
                        feature_parents[b].retain(|&p| p != a);
                        feature_parents[a].push(b);
                        scores[a] = dd.family_score(a, &full_parents(&feature_parents, a));
                    }
                }
                let b = match mv {
                    Move::Add(_, b) | Move::Remove(_, b) | Move::Reverse(_, b) => b,
                };
                scores[b] = dd.family_score(b, &full_parents(&feature_parents, b));
            }
        }
    }

    // CPT estimation with Laplace smoothing (equivalent sample size ess)
    let counts = data.class_counts();
    let n = data.n_samples() as f64;
    let kc = data.n_classes() as f64;
    let priors: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64 + params.ess / kc) / (n + params.ess))
        .collect();
    let nodes: Vec<FeatureNode> = (0..n_features)
        .map(|f| {
            let parents = full_parents(&feature_parents, f);
            let (raw, r) = dd.family_counts(f, &parents);
            let cpt = raw
                .iter()
                .map(|row| {
                    let total: f64 = row.iter().sum();
                    row.iter()
                        .map(|&c| (c + params.ess / r as f64) / (total + params.ess))
                        .collect()
                })
                .collect();
            FeatureNode { parents, cpt }
        })
        .collect();

    Ok(BayesNetModel {
        discretizer,
        priors,
        nodes,
        n_classes: data.n_classes(),
    })
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Add(usize, usize),
    Remove(usize, usize),
    Reverse(usize, usize),
}

impl BayesNetModel {
    pub fn discretizer(&self) -> &Discretizer {
        &self.discretizer
    }

    /// Number of feature-to-feature edges in the learned structure.
    pub fn n_feature_edges(&self) -> usize {
        self.nodes
            .iter()
            .map(|node| node.parents.iter().filter(|p| matches!(p, Parent::Feature(_))).count())
            .sum()
    }

    fn parent_config(&self, node: &FeatureNode, class: usize, bins: &[usize]) -> usize {
        let mut idx = 0;
        for &p in &node.parents {
            let (card, value) = match p {
                Parent::Class => (self.n_classes, class),
                Parent::Feature(f) => (self.discretizer.n_bins(f), bins[f]),
            };
            idx = idx * card + value;
        }
        idx
    }

    /// Joint probability of one complete discrete configuration; used to
    /// verify that the factorization sums to 1 over all configurations.
    pub fn joint_probability(&self, class: usize, bins: &[usize]) -> f64 {
        let mut p = self.priors[class];
        for (f, node) in self.nodes.iter().enumerate() {
            p *= node.cpt[self.parent_config(node, class, bins)][bins[f]];
        }
        p
    }

    /// Class posterior for an already-discretized sample.
    pub fn predict_bins(&self, bins: &[usize]) -> Prediction {
        let log_post: Vec<f64> = (0..self.n_classes)
            .map(|c| {
                let mut lp = self.priors[c].ln();
                for (f, node) in self.nodes.iter().enumerate() {
                    lp += node.cpt[self.parent_config(node, c, bins)][bins[f]].ln();
                }
                lp
            })
            .collect();
        Prediction::from_probs(normalize_log(&log_post))
    }
}

impl Model for BayesNetModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        self.predict_bins(&self.discretizer.transform(features))
    }
}
