use serde::{Deserialize, Serialize};

/// Node of a binary decision tree stored in a flat array.
///
/// Rows with `x[feature] < threshold` go left. Leaves hold either a single
/// additive score (boosted trees) or a class distribution (CART and forest
/// trees).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

/// Flat tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] < *threshold { *left } else { *right },
                TreeNode::Leaf { value } => return value,
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn rec(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + rec(nodes, *left).max(rec(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        rec(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

/// Threshold strictly above `lo` and at most `hi` (`lo < hi`), normally
/// their midpoint.
pub(crate) fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing() {
        let t = Tree {
            nodes: vec![
                TreeNode::Split { feature: 1, threshold: 0.5, left: 1, right: 2 },
                TreeNode::Leaf { value: vec![-1.0] },
                TreeNode::Leaf { value: vec![1.0] },
            ],
        };
        assert_eq!(t.leaf_value(&[9.0, 0.4]), &[-1.0]);
        assert_eq!(t.leaf_value(&[9.0, 0.5]), &[1.0]);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.n_leaves(), 2);
    }

    #[test]
    fn threshold_between_adjacent_floats() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = split_threshold(lo, hi);
        assert!(t > lo && t <= hi);
        assert_eq!(split_threshold(1.0, 3.0), 2.0);
    }
}
