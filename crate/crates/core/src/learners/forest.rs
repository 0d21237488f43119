use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::boosted::sorted_values;
use super::tree::{split_threshold, Tree, TreeNode};
use super::Dataset;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::{Error, Result};

/// Features considered at each split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Log2,
    Fraction(f64),
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> Result<usize> {
        let k = match self {
            Self::All => d,
            Self::Sqrt => (d as f64).sqrt().round() as usize,
            Self::Log2 => (d as f64).log2().round() as usize,
            Self::Fraction(f) if f > 0.0 && f <= 1.0 => (f * d as f64).round() as usize,
            Self::Fraction(f) => return Err(Error::Config(format!("max_features fraction {f} outside (0, 1]"))),
            Self::Count(c) => c,
        };
        Ok(k.clamp(1, d))
    }
}

/// Hyperparameters of a single Gini tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            seed: 0,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 || self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_leaf >= 1 and min_samples_split >= 2 required".into()));
        }
        Ok(())
    }
}

/// Hyperparameters of a random forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub params: TreeParams,
    pub n_features: usize,
    pub n_classes: usize,
    pub tree: Tree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub params: ForestParams,
    pub n_features: usize,
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl DecisionTreeModel {
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        self.tree.leaf_value(x).to_vec()
    }
}

impl RandomForestModel {
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, b) in p.iter_mut().zip(t.leaf_value(x)) {
                *a += b;
            }
        }
        let m = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= m);
        p
    }
}

pub fn train_decision_tree(data: &Dataset, params: &TreeParams) -> Result<DecisionTreeModel> {
    params.validate()?;
    data.check_trainable()?;
    let mut rng = rng_from_seed(params.seed);
    let tree = grow_gini(data, params, &mut rng)?;
    Ok(DecisionTreeModel {
        params: params.clone(),
        n_features: data.n_features(),
        n_classes: data.n_classes(),
        tree,
    })
}

/// Each tree `t` draws its bootstrap sample and split features from a
/// stream derived from `(seed, t)`.
pub fn train_random_forest(data: &Dataset, params: &ForestParams) -> Result<RandomForestModel> {
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    data.check_trainable()?;
    let tp = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features,
        seed: 0,
    };
    tp.validate()?;
    let n = data.n_rows();
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut rng = rng_from_seed(derive_seed(params.seed, t as u64));
        let tree = if params.bootstrap {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow_gini(&data.subset(&idx), &tp, &mut rng)?
        } else {
            grow_gini(data, &tp, &mut rng)?
        };
        trees.push(tree);
    }
    Ok(RandomForestModel {
        params: params.clone(),
        n_features: data.n_features(),
        n_classes: data.n_classes(),
        trees,
    })
}

const NONE: u32 = u32::MAX;

struct Node {
    id: usize,
    counts: Vec<usize>,
    n: usize,
    /// Feature mask for this node when features are subsampled.
    features: Option<Vec<bool>>,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn sum_sq(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| (c * c) as f64).sum()
}

/// Level-wise CART growth maximizing the Gini impurity decrease. Ties go to
/// the lowest feature, then the lowest threshold.
fn grow_gini(data: &Dataset, p: &TreeParams, rng: &mut Rng) -> Result<Tree> {
    let n = data.n_rows();
    let d = data.n_features();
    let k = data.n_classes();
    let y = data.labels();
    let sorted = data.sorted_columns();
    let values = sorted_values(data, &sorted);
    let mtry = p.max_features.resolve(d)?;
    let pick = |rng: &mut Rng| -> Option<Vec<bool>> {
        (mtry < d).then(|| {
            let mut mask = vec![false; d];
            sample(rng, d, mtry).into_iter().for_each(|f| mask[f] = true);
            mask
        })
    };

    let mut slot = vec![0u32; n];
    let mut nodes = vec![TreeNode::Leaf { value: Vec::new() }];
    let mut active = vec![Node {
        id: 0,
        counts: data.class_counts(),
        n,
        features: None,
    }];
    let mut depth = 0;
    while !active.is_empty() {
        let can_split = |a: &Node| {
            p.max_depth.is_none_or(|m| depth < m)
                && a.n >= p.min_samples_split
                && a.n >= 2 * p.min_samples_leaf
                && a.counts.iter().filter(|&&c| c > 0).count() > 1
        };
        let splittable: Vec<bool> = active.iter().map(can_split).collect();
        for (a, &s) in active.iter_mut().zip(&splittable) {
            if s {
                a.features = pick(rng);
            }
        }
        let mut best: Vec<Option<Candidate>> = vec![None; active.len()];
        if splittable.iter().any(|&s| s) {
            let parent: Vec<f64> = active.iter().map(|a| sum_sq(&a.counts) / a.n as f64).collect();
            let mut left = vec![vec![0usize; k]; active.len()];
            let mut state = vec![(0usize, 0.0f64, 0.0f64, 0.0f64); active.len()];
            for f in 0..d {
                for (s, a) in active.iter().enumerate() {
                    left[s].iter_mut().for_each(|c| *c = 0);
                    state[s] = (0, 0.0, sum_sq(&a.counts), 0.0);
                }
                for (&r, &v) in sorted[f].iter().zip(&values[f]) {
                    let r = r as usize;
                    let s = slot[r];
                    if s == NONE {
                        continue;
                    }
                    let s = s as usize;
                    let a = &active[s];
                    if !splittable[s] || a.features.as_ref().is_some_and(|m| !m[f]) {
                        continue;
                    }
                    let (nl, sq_l, sq_r, last) = &mut state[s];
                    let nr = a.n - *nl;
                    if *nl >= p.min_samples_leaf && nr >= p.min_samples_leaf && v > *last {
                        let gain = *sq_l / *nl as f64 + *sq_r / nr as f64 - parent[s];
                        let floor = best[s].map_or(1e-12, |c| c.gain);
                        if gain > floor {
                            best[s] = Some(Candidate {
                                gain,
                                feature: f,
                                threshold: split_threshold(*last, v),
                            });
                        }
                    }
                    let cl = left[s][y[r]];
                    let cr = a.counts[y[r]] - cl;
                    *sq_l += (2 * cl + 1) as f64;
                    *sq_r -= (2 * cr - 1) as f64;
                    left[s][y[r]] += 1;
                    *nl += 1;
                    *last = v;
                }
            }
        }

        let mut child_base = vec![NONE; active.len()];
        let mut next = Vec::new();
        for (s, a) in active.iter().enumerate() {
            match best[s] {
                Some(c) => {
                    let l = nodes.len();
                    nodes.push(TreeNode::Leaf { value: Vec::new() });
                    nodes.push(TreeNode::Leaf { value: Vec::new() });
                    nodes[a.id] = TreeNode::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: l,
                        right: l + 1,
                    };
                    child_base[s] = next.len() as u32;
                    for id in [l, l + 1] {
                        next.push(Node { id, counts: vec![0; k], n: 0, features: None });
                    }
                }
                None => {
                    let value = a.counts.iter().map(|&c| c as f64 / a.n as f64).collect();
                    nodes[a.id] = TreeNode::Leaf { value };
                }
            }
        }
        for r in 0..n {
            let s = slot[r];
            if s == NONE {
                continue;
            }
            match best[s as usize] {
                Some(c) => {
                    let ns = child_base[s as usize] + u32::from(data.value(r, c.feature) >= c.threshold);
                    slot[r] = ns;
                    let node = &mut next[ns as usize];
                    node.counts[y[r]] += 1;
                    node.n += 1;
                }
                None => slot[r] = NONE,
            }
        }
        active = next;
        depth += 1;
    }
    Ok(Tree { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::argmax;

    fn blobs() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let c = (i % 2) as f64;
                vec![c * 2.0 + ((i * 37) % 17) as f64 / 10.0, ((i * 13) % 7) as f64]
            })
            .collect();
        Dataset::from_rows(&rows, (0..40).map(|i| i % 2).collect(), 2).unwrap()
    }

    #[test]
    fn unlimited_tree_fits_training_data() {
        let d = blobs();
        let m = train_decision_tree(&d, &TreeParams::default()).unwrap();
        for i in 0..d.n_rows() {
            assert_eq!(argmax(&m.proba(d.row(i))), d.labels()[i]);
        }
    }

    #[test]
    fn depth_limit_respected() {
        let d = blobs();
        let m = train_decision_tree(&d, &TreeParams { max_depth: Some(1), ..Default::default() }).unwrap();
        assert!(m.tree.depth() <= 1);
    }

    #[test]
    fn forest_is_seeded() {
        let d = blobs();
        let p = ForestParams { n_trees: 7, seed: 3, ..Default::default() };
        assert_eq!(train_random_forest(&d, &p).unwrap(), train_random_forest(&d, &p).unwrap());
        let q = ForestParams { seed: 4, ..p };
        assert_ne!(train_random_forest(&d, &p).unwrap().trees, train_random_forest(&d, &q).unwrap().trees);
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(400).unwrap(), 20);
        assert_eq!(MaxFeatures::Count(1000).resolve(4).unwrap(), 4);
        assert!(MaxFeatures::Fraction(0.0).resolve(4).is_err());
    }
}
