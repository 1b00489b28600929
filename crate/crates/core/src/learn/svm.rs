//! Linear SVM trained by seeded stochastic subgradient descent on mean
//! hinge loss plus an L2 penalty.

use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::SvmParams;

/// Epoch-decayed SGD: per epoch, visit the rows in a seeded shuffle and step
/// along the hinge subgradient of each sample plus the regularizer.
pub(super) fn fit_svm(p: &SvmParams, x: &[Vec<f64>], y: &[bool], seed: u64) -> (Vec<f64>, f64) {
    let d = x[0].len();
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for epoch in 0..p.epochs {
        order.shuffle(&mut rng);
        let step = p.learning_rate / (1.0 + epoch as f64);
        for &i in &order {
            let target = if y[i] { 1.0 } else { -1.0 };
            let margin: f64 = weights.iter().zip(&x[i]).map(|(w, v)| w * v).sum::<f64>() + bias;
            let violated = target * margin < 1.0;
            for (w, v) in weights.iter_mut().zip(&x[i]) {
                let hinge = if violated { -target * v } else { 0.0 };
                *w -= step * (hinge + 2.0 * p.lambda * *w);
            }
            if violated {
                bias -= step * (-target);
            }
        }
    }
    (weights, bias)
}
