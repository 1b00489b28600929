//! L2-regularized logistic regression trained by full-batch gradient
//! descent.

use super::{sigmoid, LogisticParams};

/// Regularized objective and its gradient at (weights, bias):
/// mean logistic loss over the rows plus `lambda * ||w||^2` (bias
/// unregularized). Returns (objective, d/dw, d/db).
///
/// Public so tests can run finite-difference and grid-search oracles
/// against the same function the trainer minimizes.
pub fn objective_and_gradient(
    weights: &[f64],
    bias: f64,
    x: &[Vec<f64>],
    y: &[bool],
    lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        let target = f64::from(label);
        // Numerically stable log(1 + exp(-|z|)) form.
        loss += z.max(0.0) - z * target + (-z.abs()).exp().ln_1p();
        let residual = sigmoid(z) - target;
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    loss /= n;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + 2.0 * lambda * w;
    }
    grad_b /= n;
    loss += lambda * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Gradient descent until the gradient norm drops below `tol` or
/// `max_iters` is reached. Each step starts from the configured learning
/// rate and halves until the objective does not increase, so strong
/// regularization cannot make the iteration diverge.
pub(super) fn fit_logistic(p: &LogisticParams, x: &[Vec<f64>], y: &[bool]) -> (Vec<f64>, f64) {
    let d = x[0].len();
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut loss = objective_and_gradient(&weights, bias, x, y, p.lambda).0;
    for _ in 0..p.max_iters {
        let (_, grad_w, grad_b) = objective_and_gradient(&weights, bias, x, y, p.lambda);
        let norm = (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
        if norm < p.tol {
            break;
        }
        let mut step = p.learning_rate;
        loop {
            let candidate_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - step * g)
                .collect();
            let candidate_b = bias - step * grad_b;
            let candidate_loss =
                objective_and_gradient(&candidate_w, candidate_b, x, y, p.lambda).0;
            if candidate_loss <= loss || step < 1e-12 {
                weights = candidate_w;
                bias = candidate_b;
                loss = candidate_loss;
                break;
            }
            step /= 2.0;
        }
    }
    (weights, bias)
}
