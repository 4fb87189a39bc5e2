//! Flat-array regression trees and the level-order tree grower.

use ndarray::ArrayView2;

use super::split::{best_split_sorted, SplitParams};
use super::TrainError;

/// Marker stored in [`TreeNode::feature`] for leaves.
pub const LEAF: u16 = u16::MAX;

/// Largest node count a tree may have; indices must fit in 16 bits.
pub const MAX_NODES: usize = 65_534;

/// One node of a flat tree. Internal nodes route `x[feature] < value` to
/// `left`, everything else to `right`; leaves carry their output in `value`
/// and have both children set to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub feature: u16,
    pub value: f32,
    pub left: u16,
    pub right: u16,
}

impl TreeNode {
    pub fn leaf(value: f32) -> TreeNode {
        TreeNode {
            feature: LEAF,
            value,
            left: 0,
            right: 0,
        }
    }

    #[inline]
    pub fn is_leaf(&self) -> bool {
        self.feature == LEAF
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeDefect {
    Empty,
    TooManyNodes(usize),
    FeatureOutOfRange { node: usize, feature: u16 },
    ChildOutOfRange { node: usize },
    LeafWithChildren { node: usize },
    Unreachable { node: usize },
    NonFinite { node: usize },
}

impl Tree {
    /// Output of the tree for one row. `row` must have at least as many
    /// entries as the largest feature index used.
    #[inline]
    pub fn eval(&self, row: &[f64]) -> f32 {
        let mut i = 0usize;
        loop {
            let node = &self.nodes[i];
            if node.is_leaf() {
                return node.value;
            }
            i = if row[node.feature as usize] < f64::from(node.value) {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            let n = &nodes[i];
            if n.is_leaf() {
                0
            } else {
                1 + go(nodes, n.left as usize).max(go(nodes, n.right as usize))
            }
        }
        go(&self.nodes, 0)
    }

    /// Structural checks: children point strictly forward, every node but
    /// the root has exactly one parent, leaves carry no children and all
    /// values are finite.
    pub fn validate(&self, n_features: usize) -> Result<(), TreeDefect> {
        let len = self.nodes.len();
        if len == 0 {
            return Err(TreeDefect::Empty);
        }
        if len > MAX_NODES {
            return Err(TreeDefect::TooManyNodes(len));
        }
        let mut parents = vec![0u8; len];
        for (i, n) in self.nodes.iter().enumerate() {
            if !n.value.is_finite() {
                return Err(TreeDefect::NonFinite { node: i });
            }
            if n.is_leaf() {
                if n.left != 0 || n.right != 0 {
                    return Err(TreeDefect::LeafWithChildren { node: i });
                }
                continue;
            }
            if n.feature as usize >= n_features {
                return Err(TreeDefect::FeatureOutOfRange {
                    node: i,
                    feature: n.feature,
                });
            }
            for child in [n.left as usize, n.right as usize] {
                if child <= i || child >= len {
                    return Err(TreeDefect::ChildOutOfRange { node: i });
                }
                parents[child] += 1;
                if parents[child] > 1 {
                    return Err(TreeDefect::Unreachable { node: child });
                }
            }
        }
        if let Some(i) = parents.iter().skip(1).position(|&p| p == 0) {
            return Err(TreeDefect::Unreachable { node: i + 1 });
        }
        Ok(())
    }
}

/// Grows trees on a fixed feature matrix. Row indices are presorted by
/// every feature once, then partitioned stably at each split so every node
/// sees its rows in feature order without re-sorting.
pub(crate) struct TreeGrower<'a> {
    x: ArrayView2<'a, f64>,
    params: SplitParams,
    max_depth: usize,
    presorted: Vec<Vec<u32>>,
}

struct Pending {
    index: usize,
    depth: usize,
    rows_by_feature: Vec<Vec<u32>>,
}

impl<'a> TreeGrower<'a> {
    pub(crate) fn new(x: ArrayView2<'a, f64>, params: SplitParams, max_depth: usize) -> Self {
        let presorted = x
            .columns()
            .into_iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| {
                    col[a as usize]
                        .total_cmp(&col[b as usize])
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        TreeGrower {
            x,
            params,
            max_depth,
            presorted,
        }
    }

    pub(crate) fn grow(&self, g: &[f64], h: &[f64]) -> Result<Tree, TrainError> {
        let n_rows = self.x.nrows();
        let n_features = self.x.ncols();
        let mut nodes = vec![TreeNode::leaf(0.0)];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(Pending {
            index: 0,
            depth: 0,
            rows_by_feature: self.presorted.clone(),
        });

        let mut values = Vec::with_capacity(n_rows);
        let mut gs = Vec::with_capacity(n_rows);
        let mut hs = Vec::with_capacity(n_rows);
        let mut goes_left = vec![false; n_rows];

        while let Some(node) = queue.pop_front() {
            let rows = &node.rows_by_feature[0];
            let (g_total, h_total) = rows.iter().fold((0.0, 0.0), |(gt, ht), &r| {
                (gt + g[r as usize], ht + h[r as usize])
            });
            let leaf_value = (-g_total / (h_total + self.params.lambda)) as f32;

            let mut best: Option<(usize, f32)> = None;
            let mut best_gain = 0.0;
            if node.depth < self.max_depth {
                for (f, sorted) in node.rows_by_feature.iter().enumerate() {
                    values.clear();
                    gs.clear();
                    hs.clear();
                    for &r in sorted {
                        let r = r as usize;
                        values.push(self.x[[r, f]]);
                        gs.push(g[r]);
                        hs.push(h[r]);
                    }
                    if let Some((s, stored)) =
                        best_split_sorted(&values, &gs, &hs, g_total, h_total, &self.params)
                    {
                        if best.is_none() || s.gain > best_gain {
                            best = Some((f, stored));
                            best_gain = s.gain;
                        }
                    }
                }
            }

            let Some((feature, threshold)) = best else {
                nodes[node.index] = TreeNode::leaf(leaf_value);
                continue;
            };
            if nodes.len() + 2 > MAX_NODES {
                return Err(TrainError::TreeTooLarge);
            }
            let left = nodes.len();
            nodes.push(TreeNode::leaf(0.0));
            nodes.push(TreeNode::leaf(0.0));
            nodes[node.index] = TreeNode {
                feature: feature as u16,
                value: threshold,
                left: left as u16,
                right: (left + 1) as u16,
            };

            let t = f64::from(threshold);
            for &r in &node.rows_by_feature[0] {
                goes_left[r as usize] = self.x[[r as usize, feature]] < t;
            }
            let mut left_lists = Vec::with_capacity(n_features);
            let mut right_lists = Vec::with_capacity(n_features);
            for sorted in &node.rows_by_feature {
                let (l, r): (Vec<u32>, Vec<u32>) = sorted.iter().partition(|&&r| goes_left[r as usize]);
                left_lists.push(l);
                right_lists.push(r);
            }
            queue.push_back(Pending {
                index: left,
                depth: node.depth + 1,
                rows_by_feature: left_lists,
            });
            queue.push_back(Pending {
                index: left + 1,
                depth: node.depth + 1,
                rows_by_feature: right_lists,
            });
        }
        Ok(Tree { nodes })
    }
}
