use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::tree::{split_threshold, Tree, TreeNode};
use super::{softmax_into, Dataset};
use crate::rng::{rng_from_seed, stream_seed};
use crate::{Error, Result};

/// Hyperparameters of the softmax gradient-boosted tree ensemble.
///
/// Defaults: 200 rounds, depth 7, learning rate 0.1, L2 leaf penalty 1.0.
/// `min_child_weight` is the minimum hessian sum per child; 0 lets trees
/// split until leaves are pure or `min_samples_leaf` binds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostedParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub min_samples_leaf: usize,
    pub min_child_weight: f64,
    pub min_split_gain: f64,
    pub colsample: f64,
    pub seed: u64,
}

impl Default for BoostedParams {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            max_depth: 7,
            learning_rate: 0.1,
            lambda: 1.0,
            min_samples_leaf: 1,
            min_child_weight: 0.0,
            min_split_gain: 0.0,
            colsample: 1.0,
            seed: 0,
        }
    }
}

impl BoostedParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("boosted: {m}")));
        if self.n_rounds == 0 {
            return bad("n_rounds must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1");
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return bad("min_child_weight must be non-negative");
        }
        if !self.min_split_gain.is_finite() {
            return bad("min_split_gain must be finite");
        }
        if !(self.colsample > 0.0 && self.colsample <= 1.0) {
            return bad("colsample must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Trained boosted ensemble: `trees[round][class]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub params: BoostedParams,
    pub n_features: usize,
    pub n_classes: usize,
    pub trees: Vec<Vec<Tree>>,
    /// Mean training cross-entropy before the first round and after each round.
    pub loss_history: Vec<f64>,
}

impl BoostedModel {
    pub fn raw_scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for round in &self.trees {
            for (k, t) in round.iter().enumerate() {
                s[k] += t.leaf_value(x)[0];
            }
        }
        s
    }

    pub fn initial_loss(&self) -> f64 {
        self.loss_history[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_history.last().expect("history is never empty")
    }
}

/// Fits the ensemble by second-order gradient boosting on softmax
/// cross-entropy. Each round fits one regression tree per class to the
/// gradients of the current scores; leaf value is
/// `-learning_rate * G / (H + lambda)`.
pub fn train_boosted(data: &Dataset, params: &BoostedParams) -> Result<BoostedModel> {
    params.validate()?;
    data.check_trainable()?;
    let n = data.n_rows();
    let k = data.n_classes();
    let d = data.n_features();
    let sorted = data.sorted_columns();
    let sorted_values = sorted_values(data, &sorted);
    let mut rng = rng_from_seed(stream_seed(params.seed, "boosted-colsample"));
    let n_cols = ((params.colsample * d as f64).round() as usize).clamp(1, d);

    let mut scores = vec![0.0; n * k];
    let mut prob = vec![0.0; n * k];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut leaf_out = vec![0.0; n];
    let mut grower = GradientTreeGrower::new(n, params);
    let mut loss_history = Vec::with_capacity(params.n_rounds + 1);
    loss_history.push(cross_entropy(&scores, data.labels(), k));

    let all: Vec<usize> = (0..d).collect();
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            softmax_into(&scores[i * k..(i + 1) * k], &mut prob[i * k..(i + 1) * k]);
        }
        let mut round = Vec::with_capacity(k);
        // With two classes the second gradient is the negated first, so
        // its tree is the mirror image of the first one.
        let grown = if k == 2 { 1 } else { k };
        for c in 0..grown {
            for i in 0..n {
                let p = prob[i * k + c];
                let y = if data.labels()[i] == c { 1.0 } else { 0.0 };
                grad[i] = p - y;
                hess[i] = (p * (1.0 - p)).max(1e-16);
            }
            let features = if n_cols == d {
                all.clone()
            } else {
                let mut f = sample(&mut rng, d, n_cols).into_vec();
                f.sort_unstable();
                f
            };
            let tree = grower.grow(data, &sorted, &sorted_values, &features, &grad, &hess, &mut leaf_out);
            for i in 0..n {
                scores[i * k + c] += leaf_out[i];
            }
            round.push(tree);
        }
        if k == 2 {
            for i in 0..n {
                scores[i * k + 1] -= leaf_out[i];
            }
            round.push(mirrored(&round[0]));
        }
        trees.push(round);
        loss_history.push(cross_entropy(&scores, data.labels(), k));
    }
    Ok(BoostedModel {
        params: params.clone(),
        n_features: d,
        n_classes: k,
        trees,
        loss_history,
    })
}

fn mirrored(t: &Tree) -> Tree {
    let nodes = t
        .nodes
        .iter()
        .map(|n| match n {
            TreeNode::Leaf { value } => TreeNode::Leaf {
                value: value.iter().map(|v| -v).collect(),
            },
            split => split.clone(),
        })
        .collect();
    Tree { nodes }
}

/// Feature values laid out in each column's sorted order.
pub(crate) fn sorted_values(data: &Dataset, sorted: &[Vec<u32>]) -> Vec<Vec<f64>> {
    sorted
        .iter()
        .enumerate()
        .map(|(f, col)| col.iter().map(|&r| data.value(r as usize, f)).collect())
        .collect()
}

fn cross_entropy(scores: &[f64], labels: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let s = &scores[i * k..(i + 1) * k];
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - s[y];
    }
    total / labels.len() as f64
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Active {
    node: usize,
    g: f64,
    h: f64,
    n: usize,
}

/// Running left-side sums of one node during a column scan.
struct Scan {
    g: f64,
    h: f64,
    n: usize,
    last: f64,
    total_g: f64,
    total_h: f64,
    total_n: usize,
    parent: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Level-wise exact greedy grower. All nodes of one depth are searched in a
/// single pass over each presorted feature column.
struct GradientTreeGrower {
    slot: Vec<u32>,
    scan_slot: Vec<u32>,
    gh: Vec<(f64, f64)>,
    max_depth: usize,
    lambda: f64,
    eta: f64,
    min_samples_leaf: usize,
    min_child_weight: f64,
    min_split_gain: f64,
}

impl GradientTreeGrower {
    fn new(n: usize, p: &BoostedParams) -> Self {
        Self {
            slot: vec![0; n],
            scan_slot: vec![0; n],
            gh: vec![(0.0, 0.0); n],
            max_depth: p.max_depth,
            lambda: p.lambda,
            eta: p.learning_rate,
            min_samples_leaf: p.min_samples_leaf,
            min_child_weight: p.min_child_weight,
            min_split_gain: p.min_split_gain,
        }
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.lambda)
    }

    fn grow(
        &mut self,
        data: &Dataset,
        sorted: &[Vec<u32>],
        values: &[Vec<f64>],
        features: &[usize],
        grad: &[f64],
        hess: &[f64],
        leaf_out: &mut [f64],
    ) -> Tree {
        let n = data.n_rows();
        self.slot.iter_mut().for_each(|s| *s = 0);
        let mut nodes = vec![TreeNode::Leaf { value: Vec::new() }];
        let mut active = vec![Active {
            node: 0,
            g: grad.iter().sum(),
            h: hess.iter().sum(),
            n,
        }];
        let msl = self.min_samples_leaf;
        let mut depth = 0;
        while !active.is_empty() {
            let mut best: Vec<Option<Candidate>> = vec![None; active.len()];
            if depth < self.max_depth {
                let mut scans: Vec<Scan> = active
                    .iter()
                    .map(|a| Scan {
                        g: 0.0,
                        h: 0.0,
                        n: 0,
                        last: 0.0,
                        total_g: a.g,
                        total_h: a.h,
                        total_n: a.n,
                        parent: self.score(a.g, a.h),
                    })
                    .collect();
                let mut any = false;
                for r in 0..n {
                    let s = self.slot[r];
                    self.scan_slot[r] = if s != NONE && {
                        let a = &active[s as usize];
                        a.n >= 2 * msl && a.h >= 2.0 * self.min_child_weight
                    } {
                        any = true;
                        s
                    } else {
                        NONE
                    };
                    self.gh[r] = (grad[r], hess[r]);
                }
                if any {
                    for &f in features {
                        for sc in scans.iter_mut() {
                            sc.g = 0.0;
                            sc.h = 0.0;
                            sc.n = 0;
                        }
                        for (&r, &v) in sorted[f].iter().zip(&values[f]) {
                            let r = r as usize;
                            let s = self.scan_slot[r];
                            if s == NONE {
                                continue;
                            }
                            let sc = &mut scans[s as usize];
                            if sc.n >= msl && v > sc.last && sc.total_n - sc.n >= msl {
                                let (gl, hl) = (sc.g, sc.h);
                                let (gr, hr) = (sc.total_g - gl, sc.total_h - hl);
                                if hl >= self.min_child_weight && hr >= self.min_child_weight {
                                    let gain = self.score(gl, hl) + self.score(gr, hr) - sc.parent;
                                    let b = &mut best[s as usize];
                                    if gain > b.map_or(self.min_split_gain - 1e-12, |c| c.gain) {
                                        *b = Some(Candidate {
                                            gain,
                                            feature: f,
                                            threshold: split_threshold(sc.last, v),
                                        });
                                    }
                                }
                            }
                            let (g, h) = self.gh[r];
                            sc.g += g;
                            sc.h += h;
                            sc.n += 1;
                            sc.last = v;
                        }
                    }
                }
            }

            // Materialize this level: splits get two children, the rest become leaves.
            let mut child_base = vec![NONE; active.len()];
            let mut next = Vec::new();
            for (s, a) in active.iter().enumerate() {
                match best[s] {
                    Some(c) => {
                        let left = nodes.len();
                        nodes.push(TreeNode::Leaf { value: Vec::new() });
                        nodes.push(TreeNode::Leaf { value: Vec::new() });
                        nodes[a.node] = TreeNode::Split {
                            feature: c.feature,
                            threshold: c.threshold,
                            left,
                            right: left + 1,
                        };
                        child_base[s] = next.len() as u32;
                        for node in [left, left + 1] {
                            next.push(Active { node, g: 0.0, h: 0.0, n: 0 });
                        }
                    }
                    None => {
                        let v = -self.eta * a.g / (a.h + self.lambda);
                        nodes[a.node] = TreeNode::Leaf { value: vec![v] };
                    }
                }
            }
            for r in 0..n {
                let s = self.slot[r];
                if s == NONE {
                    continue;
                }
                let s = s as usize;
                match best[s] {
                    Some(c) => {
                        let side = u32::from(data.value(r, c.feature) >= c.threshold);
                        let ns = child_base[s] + side;
                        self.slot[r] = ns;
                        let a = &mut next[ns as usize];
                        a.g += grad[r];
                        a.h += hess[r];
                        a.n += 1;
                    }
                    None => {
                        if let TreeNode::Leaf { value } = &nodes[active[s].node] {
                            leaf_out[r] = value[0];
                        }
                        self.slot[r] = NONE;
                    }
                }
            }
            active = next;
            depth += 1;
        }
        Tree { nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(m: &BoostedModel, d: &Dataset) -> f64 {
        let ok = (0..d.n_rows())
            .filter(|&i| super::super::argmax(&m.raw_scores(d.row(i))) == d.labels()[i])
            .count();
        ok as f64 / d.n_rows() as f64
    }

    fn xor() -> Dataset {
        Dataset::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn xor_depth_two() {
        let p = BoostedParams { n_rounds: 50, max_depth: 2, ..Default::default() };
        let m = train_boosted(&xor(), &p).unwrap();
        assert_eq!(accuracy(&m, &xor()), 1.0);
        assert!(m.trees.iter().flatten().all(|t| t.depth() <= 2));
    }

    #[test]
    fn one_dimensional_split() {
        let xs: Vec<Vec<f64>> = (-5..5).map(|i| vec![i as f64 + 0.5]).collect();
        let y = xs.iter().map(|x| usize::from(x[0] > 0.0)).collect();
        let d = Dataset::from_rows(&xs, y, 2).unwrap();
        let m = train_boosted(&d, &BoostedParams { n_rounds: 10, ..Default::default() }).unwrap();
        assert_eq!(accuracy(&m, &d), 1.0);
        assert!(m.final_loss() < m.initial_loss());
        assert_eq!(m.loss_history.len(), 11);
        match &m.trees[0][1].nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.0);
            }
            other => panic!("expected a root split, got {other:?}"),
        }
    }

    #[test]
    fn parameter_validation() {
        for p in [
            BoostedParams { learning_rate: 0.0, ..Default::default() },
            BoostedParams { learning_rate: 1.5, ..Default::default() },
            BoostedParams { n_rounds: 0, ..Default::default() },
            BoostedParams { max_depth: 0, ..Default::default() },
            BoostedParams { colsample: 0.0, ..Default::default() },
        ] {
            assert!(matches!(train_boosted(&xor(), &p), Err(Error::Config(_))));
        }
    }

    #[test]
    fn first_leaf_is_one_newton_step() {
        // Root-only tree: leaf = -eta * sum(p - y) / (sum p(1-p) + lambda).
        let d = Dataset::from_rows(&[vec![0.0], vec![0.0], vec![0.0]], vec![0, 0, 1], 2).unwrap();
        let m = train_boosted(&d, &BoostedParams { n_rounds: 1, ..Default::default() }).unwrap();
        let expected = -0.1 * (1.5 - 2.0) / (0.75 + 1.0);
        assert!((m.trees[0][0].leaf_value(&[0.0])[0] - expected).abs() < 1e-15);
        assert!((m.trees[0][1].leaf_value(&[0.0])[0] + expected).abs() < 1e-15);
    }

    #[test]
    fn colsample_is_seeded() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 11) as f64).collect()).collect();
        let y = (0..30).map(|i| i % 3).collect();
        let d = Dataset::from_rows(&rows, y, 3).unwrap();
        let p = BoostedParams { n_rounds: 5, colsample: 0.5, seed: 9, ..Default::default() };
        assert_eq!(train_boosted(&d, &p).unwrap(), train_boosted(&d, &p).unwrap());
    }
}
