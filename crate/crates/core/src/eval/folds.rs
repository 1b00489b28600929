//! Stratified k-fold assignment.

use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// Fold index per instance; per-fold positive counts differ by at most one
/// from perfect stratification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }
}

/// Seeded shuffle within each class, then round-robin fold assignment.
/// Errors when either class has fewer than `k` rows, naming the class.
pub fn stratified_kfold(y: &[bool], k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    let mut positives: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut negatives: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if positives.len() < k {
        return Err(EvalError::ClassSmallerThanK {
            class: "positive",
            count: positives.len(),
            k,
        });
    }
    if negatives.len() < k {
        return Err(EvalError::ClassSmallerThanK {
            class: "negative",
            count: negatives.len(),
            k,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);
    let mut fold_of = vec![0usize; y.len()];
    for (position, &index) in positives.iter().enumerate() {
        fold_of[index] = position % k;
    }
    for (position, &index) in negatives.iter().enumerate() {
        fold_of[index] = position % k;
    }
    Ok(FoldAssignment { fold_of, k })
}
