//! CART-style trees. Classification trees split on Gini impurity decrease
//! and store the leaf positive fraction; regression trees (used as boosting
//! base learners) split on squared-error gain over gradients and store a
//! Newton leaf value. Thresholds are midpoints of adjacent observed values;
//! ties in split quality break toward the lowest column index, then the
//! lowest threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node")]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        column: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Positive-class fraction for classification trees; additive score
        /// contribution for boosted regression trees.
        value: f64,
        n_samples: usize,
    },
}

impl TreeNode {
    /// Route a row to its leaf value. One-hot and continuous columns both
    /// use the same `value <= threshold` rule.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    column,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*column] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub mtry: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

/// Pairs of (feature value, row position into `indices`) sorted by value.
fn sorted_column(rows: &[Vec<f64>], indices: &[usize], col: usize) -> Vec<(f64, usize)> {
    let mut vals: Vec<(f64, usize)> = indices.iter().map(|&i| (rows[i][col], i)).collect();
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN features"));
    vals
}

/// Sample `mtry` distinct column indices; deterministic for a fixed rng
/// state. Returned sorted so candidate evaluation order is canonical.
fn sample_columns(d: usize, mtry: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mtry = mtry.min(d).max(1);
    let mut cols: Vec<usize> = (0..d).collect();
    // partial Fisher-Yates
    for i in 0..mtry {
        let j = i + rng.gen_range(0..(d - i));
        cols.swap(i, j);
    }
    cols.truncate(mtry);
    cols.sort_unstable();
    cols
}

struct BestSplit {
    column: usize,
    threshold: f64,
    score: f64,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

pub fn fit_classification_tree(
    rows: &[Vec<f64>],
    labels: &[u8],
    indices: &[usize],
    params: &TreeParams,
    rng: &mut impl Rng,
) -> TreeNode {
    assert!(!indices.is_empty(), "cannot fit a tree on an empty table");
    grow_classification(rows, labels, indices, params, rng, 0)
}

fn grow_classification(
    rows: &[Vec<f64>],
    labels: &[u8],
    indices: &[usize],
    params: &TreeParams,
    rng: &mut impl Rng,
    depth: usize,
) -> TreeNode {
    let n = indices.len();
    let pos = indices.iter().filter(|&&i| labels[i] == 1).count();
    let leaf = || TreeNode::Leaf {
        value: pos as f64 / n as f64,
        n_samples: n,
    };

    let depth_cap = params.max_depth.map_or(false, |m| depth >= m);
    if pos == 0 || pos == n || n < 2 * params.min_leaf || depth_cap {
        return leaf();
    }

    let d = rows[0].len();
    let candidates = sample_columns(d, params.mtry, rng);
    let parent_impurity = gini(pos as f64, n as f64) * n as f64;

    let mut best: Option<BestSplit> = None;
    for col in candidates {
        let sorted = sorted_column(rows, indices, col);
        let mut left_n = 0f64;
        let mut left_pos = 0f64;
        let total_pos = pos as f64;
        for w in 0..n - 1 {
            left_n += 1.0;
            left_pos += f64::from(labels[sorted[w].1]);
            if sorted[w].0 == sorted[w + 1].0 {
                continue; // not a boundary between distinct values
            }
            let right_n = n as f64 - left_n;
            if (left_n as usize) < params.min_leaf || (right_n as usize) < params.min_leaf {
                continue;
            }
            let child_impurity =
                gini(left_pos, left_n) * left_n + gini(total_pos - left_pos, right_n) * right_n;
            let decrease = parent_impurity - child_impurity;
            if decrease > best.as_ref().map_or(1e-12, |b| b.score) {
                best = Some(BestSplit {
                    column: col,
                    threshold: (sorted[w].0 + sorted[w + 1].0) / 2.0,
                    score: decrease,
                });
            }
        }
    }

    match best {
        None => leaf(),
        Some(split) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| rows[i][split.column] <= split.threshold);
            TreeNode::Split {
                column: split.column,
                threshold: split.threshold,
                left: Box::new(grow_classification(rows, labels, &left_idx, params, rng, depth + 1)),
                right: Box::new(grow_classification(rows, labels, &right_idx, params, rng, depth + 1)),
            }
        }
    }
}

const LAMBDA: f64 = 1e-6;
const MAX_LEAF_SCORE: f64 = 10.0;

/// Regression tree over per-row gradients/hessians of the logistic loss.
/// Splits maximize the Newton gain; leaves carry `sum(g) / (sum(h) + eps)`.
pub fn fit_regression_tree(
    rows: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    indices: &[usize],
    max_depth: usize,
    min_leaf: usize,
) -> TreeNode {
    assert!(!indices.is_empty(), "cannot fit a tree on an empty table");
    grow_regression(rows, grad, hess, indices, max_depth, min_leaf, 0)
}

fn newton_value(g: f64, h: f64) -> f64 {
    (g / (h + LAMBDA)).clamp(-MAX_LEAF_SCORE, MAX_LEAF_SCORE)
}

fn grow_regression(
    rows: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    indices: &[usize],
    max_depth: usize,
    min_leaf: usize,
    depth: usize,
) -> TreeNode {
    let n = indices.len();
    let g_sum: f64 = indices.iter().map(|&i| grad[i]).sum();
    let h_sum: f64 = indices.iter().map(|&i| hess[i]).sum();
    let leaf = || TreeNode::Leaf {
        value: newton_value(g_sum, h_sum),
        n_samples: n,
    };

    if depth >= max_depth || n < 2 * min_leaf {
        return leaf();
    }

    let d = rows[0].len();
    let parent_gain = g_sum * g_sum / (h_sum + LAMBDA);
    let mut best: Option<BestSplit> = None;
    for col in 0..d {
        let sorted = sorted_column(rows, indices, col);
        let mut gl = 0f64;
        let mut hl = 0f64;
        for w in 0..n - 1 {
            gl += grad[sorted[w].1];
            hl += hess[sorted[w].1];
            if sorted[w].0 == sorted[w + 1].0 {
                continue;
            }
            let left_n = w + 1;
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let gr = g_sum - gl;
            let hr = h_sum - hl;
            let gain = gl * gl / (hl + LAMBDA) + gr * gr / (hr + LAMBDA) - parent_gain;
            if gain > best.as_ref().map_or(1e-12, |b| b.score) {
                best = Some(BestSplit {
                    column: col,
                    threshold: (sorted[w].0 + sorted[w + 1].0) / 2.0,
                    score: gain,
                });
            }
        }
    }

    match best {
        None => leaf(),
        Some(split) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| rows[i][split.column] <= split.threshold);
            TreeNode::Split {
                column: split.column,
                threshold: split.threshold,
                left: Box::new(grow_regression(rows, grad, hess, &left_idx, max_depth, min_leaf, depth + 1)),
                right: Box::new(grow_regression(rows, grad, hess, &right_idx, max_depth, min_leaf, depth + 1)),
            }
        }
    }
}
