//! Gradient-boosted regression trees on logistic loss.
//!
//! Each boosting round fits a depth-limited regression tree to the current
//! logistic-loss gradients with exact greedy split search over sorted
//! feature values, takes Newton leaf values, and adds the tree with
//! shrinkage. The ensemble starts from the class-prior log-odds and scores
//! through the logistic link.

use serde::{Deserialize, Serialize};

use super::{sigmoid, GbdtParams};

const EPS: f64 = 1e-12;
/// Newton steps are clamped so near-pure leaves cannot overshoot.
const MAX_LEAF_VALUE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// One regression tree of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    root: TreeNode,
}

impl RegressionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

/// The fitted ensemble plus its recorded training-loss curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base_score: f64,
    pub shrinkage: f64,
    pub trees: Vec<RegressionTree>,
    /// Mean training logistic loss before any tree and after each round;
    /// length is `n_trees + 1`.
    pub loss_curve: Vec<f64>,
}

impl GbdtModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .map(|t| self.shrinkage * t.predict(row))
                .sum::<f64>()
    }

    pub fn predict_probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn leaf_value(grad_sum: f64, hess_sum: f64) -> f64 {
    (grad_sum / (hess_sum + EPS)).clamp(-MAX_LEAF_VALUE, MAX_LEAF_VALUE)
}

fn gain_term(grad_sum: f64, hess_sum: f64) -> f64 {
    grad_sum * grad_sum / (hess_sum + EPS)
}

/// Exact greedy search over every feature and every boundary between
/// distinct sorted values; ties keep the first candidate found, so the
/// search order (feature index, then value order) fixes the tree.
#[allow(clippy::needless_range_loop)]
fn best_split(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let d = x[0].len();
    let total_grad: f64 = rows.iter().map(|&i| grad[i]).sum();
    let total_hess: f64 = rows.iter().map(|&i| hess[i]).sum();
    let parent_term = gain_term(total_grad, total_hess);
    let mut best: Option<SplitCandidate> = None;
    let mut sorted: Vec<usize> = Vec::with_capacity(rows.len());
    for feature in 0..d {
        sorted.clear();
        sorted.extend_from_slice(rows);
        sorted.sort_by(|&a, &b| {
            x[a][feature]
                .partial_cmp(&x[b][feature])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut left_grad = 0.0;
        let mut left_hess = 0.0;
        for (count, pair) in sorted.windows(2).enumerate() {
            let i = pair[0];
            let j = pair[1];
            left_grad += grad[i];
            left_hess += hess[i];
            let left_count = count + 1;
            let right_count = rows.len() - left_count;
            if x[i][feature] == x[j][feature] {
                continue;
            }
            if left_count < min_leaf || right_count < min_leaf {
                continue;
            }
            let gain = gain_term(left_grad, left_hess)
                + gain_term(total_grad - left_grad, total_hess - left_hess)
                - parent_term;
            if gain > best.as_ref().map_or(EPS, |b| b.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: (x[i][feature] + x[j][feature]) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

fn build_node(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    depth_left: usize,
    min_leaf: usize,
) -> TreeNode {
    let grad_sum: f64 = rows.iter().map(|&i| grad[i]).sum();
    let hess_sum: f64 = rows.iter().map(|&i| hess[i]).sum();
    if depth_left == 0 || rows.len() < 2 * min_leaf {
        return TreeNode::Leaf {
            value: leaf_value(grad_sum, hess_sum),
        };
    }
    let Some(split) = best_split(x, grad, hess, rows, min_leaf) else {
        return TreeNode::Leaf {
            value: leaf_value(grad_sum, hess_sum),
        };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| x[i][split.feature] < split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(build_node(
            x,
            grad,
            hess,
            &left_rows,
            depth_left - 1,
            min_leaf,
        )),
        right: Box::new(build_node(
            x,
            grad,
            hess,
            &right_rows,
            depth_left - 1,
            min_leaf,
        )),
    }
}

fn mean_logistic_loss(scores: &[f64], y: &[bool]) -> f64 {
    let n = scores.len() as f64;
    scores
        .iter()
        .zip(y)
        .map(|(&z, &label)| z.max(0.0) - z * f64::from(label) + (-z.abs()).exp().ln_1p())
        .sum::<f64>()
        / n
}

pub(super) fn fit_gbdt(p: &GbdtParams, x: &[Vec<f64>], y: &[bool]) -> GbdtModel {
    let n = x.len();
    let positives = y.iter().filter(|&&v| v).count() as f64;
    let prior = (positives / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (prior / (1.0 - prior)).ln();
    let mut scores = vec![base_score; n];
    let mut model = GbdtModel {
        base_score,
        shrinkage: p.learning_rate,
        trees: Vec::with_capacity(p.n_trees),
        loss_curve: Vec::with_capacity(p.n_trees + 1),
    };
    model.loss_curve.push(mean_logistic_loss(&scores, y));
    let all_rows: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..p.n_trees {
        for i in 0..n {
            let prob = sigmoid(scores[i]);
            grad[i] = f64::from(y[i]) - prob;
            hess[i] = (prob * (1.0 - prob)).max(EPS);
        }
        let tree = RegressionTree {
            root: build_node(x, &grad, &hess, &all_rows, p.depth, p.min_leaf),
        };
        for (i, score) in scores.iter_mut().enumerate() {
            *score += p.learning_rate * tree.predict(&x[i]);
        }
        model.trees.push(tree);
        model.loss_curve.push(mean_logistic_loss(&scores, y));
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = f64::from(i % 2 == 0);
            let b = f64::from((i / 2) % 2 == 0);
            let jitter = (i as f64) * 1e-3;
            x.push(vec![a + jitter, b - jitter]);
            y.push((a > 0.5) != (b > 0.5));
        }
        (x, y)
    }

    #[test]
    fn trees_learn_a_nonlinear_boundary() {
        let (x, y) = xor_data();
        let p = GbdtParams {
            n_trees: 50,
            depth: 3,
            learning_rate: 0.3,
            min_leaf: 2,
        };
        let model = fit_gbdt(&p, &x, &y);
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(row, &label)| (model.predict_probability(row) >= 0.5) == label)
            .count();
        assert_eq!(correct, x.len());
    }

    #[test]
    fn min_leaf_is_respected() {
        let (x, y) = xor_data();
        let p = GbdtParams {
            n_trees: 5,
            depth: 6,
            learning_rate: 0.1,
            min_leaf: 8,
        };
        let model = fit_gbdt(&p, &x, &y);
        // Count rows reaching each leaf of the first tree.
        fn count(node: &TreeNode, rows: Vec<&Vec<f64>>, min_leaf: usize) {
            match node {
                TreeNode::Leaf { .. } => assert!(rows.len() >= min_leaf),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (l, r): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) =
                        rows.into_iter().partition(|row| row[*feature] < *threshold);
                    count(left, l, min_leaf);
                    count(right, r, min_leaf);
                }
            }
        }
        count(&model.trees[0].root, x.iter().collect(), p.min_leaf);
    }

    #[test]
    fn loss_curve_has_expected_length() {
        let (x, y) = xor_data();
        let p = GbdtParams {
            n_trees: 7,
            ..GbdtParams::default()
        };
        let model = fit_gbdt(&p, &x, &y);
        assert_eq!(model.loss_curve.len(), 8);
        assert_eq!(model.trees.len(), 7);
    }
}
