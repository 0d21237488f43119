//! Classifiers over clip embeddings, written from scratch.
//!
//! [`ClassifierSpec`] selects a learner and its hyperparameters;
//! [`train`] fits it and returns a [`TrainedModel`], which predicts class
//! probabilities and serializes to versioned JSON. Every learner is
//! deterministic for a given seed.
//!
//! * [`BoostedParams`]: softmax gradient-boosted regression trees (one tree
//!   per class per round, Newton leaf values, exact greedy splits).
//! * [`TreeParams`]: a single CART tree with Gini splits.
//! * [`ForestParams`]: bagged Gini trees with per-split feature sampling.
//! * [`LogisticParams`]: multinomial logistic regression, gradient descent.
//! * [`SvmParams`]: linear SVM, hinge-loss subgradient descent, one-vs-rest
//!   beyond two classes.

mod boosted;
mod dataset;
mod forest;
mod linear;
mod model;
mod tree;

pub use boosted::{train_boosted, BoostedModel, BoostedParams};
pub use dataset::Dataset;
pub use forest::{train_decision_tree, train_random_forest, DecisionTreeModel, ForestParams, MaxFeatures, RandomForestModel, TreeParams};
pub use linear::{train_linear_svm, train_logistic, LinearSvmModel, LogisticModel, LogisticParams, SvmParams};
pub use model::{train, ClassifierKind, ClassifierSpec, TrainedModel, MODEL_FORMAT_VERSION};
pub use tree::{Tree, TreeNode};

/// Index of the largest value, ties to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax, renormalized so the entries sum to one.
pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

pub(crate) fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|p| *p /= sum);
}
