//! Training-set resampling: SMOTE and ADASYN over-sampling, AllKNN and
//! random under-sampling.
//!
//! All four samplers are pure, seeded functions intended to run on the
//! training rows of one cross-validation fold, after standardization (the
//! k-NN searches use Euclidean distance, so mixed feature scales would
//! otherwise dominate). Over-samplers append synthetic rows and never touch
//! originals; under-samplers remove majority rows and never touch the
//! minority class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default minority/majority ratio to rebalance toward (full balance).
pub const DEFAULT_TARGET_RATIO: f64 = 1.0;
/// Default neighbor count for SMOTE / ADASYN.
pub const DEFAULT_K: usize = 5;
/// Default maximum neighbor count for AllKNN.
pub const DEFAULT_K_MAX: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalanceError {
    #[error("resampling needs both classes present")]
    SingleClass,
    #[error("minority class has {0} rows; at least 2 are required")]
    MinorityTooSmall(usize),
    #[error("target_ratio {0} outside (0, 1]")]
    InvalidRatio(f64),
    #[error("neighbor count must be at least 1")]
    InvalidNeighborCount,
    #[error("input matrix is empty or ragged")]
    BadMatrix,
}

/// Output of one resampling pass. Original rows keep their input order and
/// values; synthetic rows (over-samplers only) are appended and flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleResult {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    pub synthetic_flags: Vec<bool>,
    /// Diagnostics such as the ADASYN uniform-budget fallback.
    pub notes: Vec<String>,
}

impl ResampleResult {
    fn passthrough(x: &[Vec<f64>], y: &[bool]) -> Self {
        ResampleResult {
            x: x.to_vec(),
            y: y.to_vec(),
            synthetic_flags: vec![false; y.len()],
            notes: Vec::new(),
        }
    }
}

/// Sampler selection for an experiment, with the per-sampler knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SamplerConfig {
    #[serde(rename = "NONE")]
    None,
    #[serde(rename = "RUS")]
    Rus { target_ratio: f64 },
    #[serde(rename = "SMOTE")]
    Smote { k: usize, target_ratio: f64 },
    #[serde(rename = "ADASYN")]
    Adasyn { k: usize, target_ratio: f64 },
    #[serde(rename = "ALLKNN")]
    AllKnn { k_max: usize },
}

impl SamplerConfig {
    /// Run the configured sampler; `None` passes the data through untouched.
    pub fn apply(
        &self,
        x: &[Vec<f64>],
        y: &[bool],
        seed: u64,
    ) -> Result<ResampleResult, BalanceError> {
        match *self {
            SamplerConfig::None => Ok(ResampleResult::passthrough(x, y)),
            SamplerConfig::Rus { target_ratio } => random_undersample(x, y, target_ratio, seed),
            SamplerConfig::Smote { k, target_ratio } => smote(x, y, k, target_ratio, seed),
            SamplerConfig::Adasyn { k, target_ratio } => adasyn(x, y, k, target_ratio, seed),
            SamplerConfig::AllKnn { k_max } => all_knn(x, y, k_max),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerConfig::None => "NONE",
            SamplerConfig::Rus { .. } => "RUS",
            SamplerConfig::Smote { .. } => "SMOTE",
            SamplerConfig::Adasyn { .. } => "ADASYN",
            SamplerConfig::AllKnn { .. } => "ALLKNN",
        }
    }
}

fn check_matrix(x: &[Vec<f64>], y: &[bool]) -> Result<(), BalanceError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(BalanceError::BadMatrix);
    }
    let width = x[0].len();
    if x.iter().any(|row| row.len() != width) {
        return Err(BalanceError::BadMatrix);
    }
    Ok(())
}

/// Indices of the minority and majority classes. The class with fewer rows
/// is the minority; on a tie the positive class is treated as minority.
fn class_split(y: &[bool]) -> Result<(bool, Vec<usize>, Vec<usize>), BalanceError> {
    let positives: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let negatives: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(BalanceError::SingleClass);
    }
    if positives.len() <= negatives.len() {
        Ok((true, positives, negatives))
    } else {
        Ok((false, negatives, positives))
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest `candidates` to row `from`, ties broken by
/// index for determinism.
fn k_nearest(
    x: &[Vec<f64>],
    from: usize,
    candidates: &[usize],
    k: usize,
    exclude_self: bool,
) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .copied()
        .filter(|&c| !(exclude_self && c == from))
        .map(|c| (squared_distance(&x[from], &x[c]), c))
        .collect();
    scored.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Uniformly remove majority rows (seeded) until minority/majority reaches
/// `target_ratio`. Minority rows and row order are untouched.
pub fn random_undersample(
    x: &[Vec<f64>],
    y: &[bool],
    target_ratio: f64,
    seed: u64,
) -> Result<ResampleResult, BalanceError> {
    check_matrix(x, y)?;
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(BalanceError::InvalidRatio(target_ratio));
    }
    let (_, minority, majority) = class_split(y)?;
    let majority_target = (minority.len() as f64 / target_ratio).round() as usize;
    if majority_target >= majority.len() {
        return Ok(ResampleResult::passthrough(x, y));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first `majority_target` entries become a
    // seeded uniform sample of majority rows to keep.
    let mut pool = majority.clone();
    for i in 0..majority_target {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut keep = vec![false; y.len()];
    for &i in &minority {
        keep[i] = true;
    }
    for &i in &pool[..majority_target] {
        keep[i] = true;
    }
    let mut result = ResampleResult {
        x: Vec::new(),
        y: Vec::new(),
        synthetic_flags: Vec::new(),
        notes: Vec::new(),
    };
    for i in 0..y.len() {
        if keep[i] {
            result.x.push(x[i].clone());
            result.y.push(y[i]);
            result.synthetic_flags.push(false);
        }
    }
    Ok(result)
}

/// How many synthetic minority rows reach `target_ratio`.
fn synthetic_budget(minority: usize, majority: usize, target_ratio: f64) -> usize {
    let desired = (majority as f64 * target_ratio).round() as usize;
    desired.saturating_sub(minority)
}

fn synthesize(x: &[Vec<f64>], base: usize, neighbors: &[usize], rng: &mut ChaCha20Rng) -> Vec<f64> {
    let nn = neighbors[rng.random_range(0..neighbors.len())];
    let u: f64 = rng.random();
    x[base]
        .iter()
        .zip(&x[nn])
        .map(|(a, b)| a + u * (b - a))
        .collect()
}

/// SMOTE: synthesize minority rows as `x + u (x_nn - x)` with `u` uniform in
/// `[0, 1)` and `x_nn` a seeded-random choice among the `k` nearest minority
/// neighbors, until the minority/majority ratio reaches `target_ratio`.
pub fn smote(
    x: &[Vec<f64>],
    y: &[bool],
    k: usize,
    target_ratio: f64,
    seed: u64,
) -> Result<ResampleResult, BalanceError> {
    check_matrix(x, y)?;
    if k == 0 {
        return Err(BalanceError::InvalidNeighborCount);
    }
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(BalanceError::InvalidRatio(target_ratio));
    }
    let (minority_label, minority, majority) = class_split(y)?;
    if minority.len() < 2 {
        return Err(BalanceError::MinorityTooSmall(minority.len()));
    }
    let budget = synthetic_budget(minority.len(), majority.len(), target_ratio);
    let effective_k = k.min(minority.len() - 1);
    let neighbor_table: Vec<Vec<usize>> = minority
        .iter()
        .map(|&i| k_nearest(x, i, &minority, effective_k, true))
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut result = ResampleResult::passthrough(x, y);
    for _ in 0..budget {
        let pick = rng.random_range(0..minority.len());
        let row = synthesize(x, minority[pick], &neighbor_table[pick], &mut rng);
        result.x.push(row);
        result.y.push(minority_label);
        result.synthetic_flags.push(true);
    }
    Ok(result)
}

/// Per-minority-point majority density among its `k` nearest neighbors over
/// the whole training set, in minority-index order. Exposed so oracle tests
/// and the budget rule share one definition.
pub fn adasyn_densities(x: &[Vec<f64>], y: &[bool], k: usize) -> Result<Vec<f64>, BalanceError> {
    check_matrix(x, y)?;
    if k == 0 {
        return Err(BalanceError::InvalidNeighborCount);
    }
    let (minority_label, minority, _) = class_split(y)?;
    let all: Vec<usize> = (0..y.len()).collect();
    let effective_k = k.min(y.len() - 1);
    Ok(minority
        .iter()
        .map(|&i| {
            let neighbors = k_nearest(x, i, &all, effective_k, true);
            let majority_neighbors = neighbors
                .iter()
                .filter(|&&n| y[n] != minority_label)
                .count();
            majority_neighbors as f64 / effective_k as f64
        })
        .collect())
}

/// Per-point synthetic budgets from the normalized densities. The total is
/// `(majority - minority) * target_ratio` rounded; each point gets its
/// density share (rounded), or a uniform share when no minority point has
/// any majority neighbor.
pub fn adasyn_budgets(
    densities: &[f64],
    minority: usize,
    majority: usize,
    target_ratio: f64,
) -> (Vec<usize>, bool) {
    let total = ((majority.saturating_sub(minority)) as f64 * target_ratio).round() as usize;
    let density_sum: f64 = densities.iter().sum();
    if density_sum == 0.0 {
        let base = total / densities.len();
        let rem = total % densities.len();
        let budgets = (0..densities.len())
            .map(|i| base + usize::from(i < rem))
            .collect();
        (budgets, true)
    } else {
        let budgets = densities
            .iter()
            .map(|r| (r / density_sum * total as f64).round() as usize)
            .collect();
        (budgets, false)
    }
}

/// ADASYN: like SMOTE but the synthesis budget per minority point is
/// proportional to its local majority density, so generation concentrates
/// near the class boundary.
pub fn adasyn(
    x: &[Vec<f64>],
    y: &[bool],
    k: usize,
    target_ratio: f64,
    seed: u64,
) -> Result<ResampleResult, BalanceError> {
    check_matrix(x, y)?;
    if k == 0 {
        return Err(BalanceError::InvalidNeighborCount);
    }
    if !(0.0..=1.0).contains(&target_ratio) {
        return Err(BalanceError::InvalidRatio(target_ratio));
    }
    let (minority_label, minority, majority) = class_split(y)?;
    if minority.len() < 2 {
        return Err(BalanceError::MinorityTooSmall(minority.len()));
    }
    let densities = adasyn_densities(x, y, k)?;
    let (budgets, uniform_fallback) =
        adasyn_budgets(&densities, minority.len(), majority.len(), target_ratio);
    let effective_k = k.min(minority.len() - 1);
    let neighbor_table: Vec<Vec<usize>> = minority
        .iter()
        .map(|&i| k_nearest(x, i, &minority, effective_k, true))
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut result = ResampleResult::passthrough(x, y);
    if uniform_fallback {
        result
            .notes
            .push("no borderline minority points; uniform generation budget".to_string());
    }
    for (point, &budget) in budgets.iter().enumerate() {
        for _ in 0..budget {
            let row = synthesize(x, minority[point], &neighbor_table[point], &mut rng);
            result.x.push(row);
            result.y.push(minority_label);
            result.synthetic_flags.push(true);
        }
    }
    Ok(result)
}

/// AllKNN: for `k = 1..=k_max`, remove every majority row whose `k` nearest
/// neighbors in the currently remaining set do not all share its class.
/// Removals within one `k` pass are computed against the set as it stood at
/// the start of that pass, then applied together.
pub fn all_knn(x: &[Vec<f64>], y: &[bool], k_max: usize) -> Result<ResampleResult, BalanceError> {
    check_matrix(x, y)?;
    if k_max == 0 {
        return Err(BalanceError::InvalidNeighborCount);
    }
    let (minority_label, _, _) = class_split(y)?;
    let mut remaining: Vec<bool> = vec![true; y.len()];
    for k in 1..=k_max {
        let snapshot: Vec<usize> = (0..y.len()).filter(|&i| remaining[i]).collect();
        if snapshot.len() < 2 {
            break;
        }
        let effective_k = k.min(snapshot.len() - 1);
        let mut to_remove = Vec::new();
        for &i in &snapshot {
            if y[i] == minority_label {
                continue;
            }
            let neighbors = k_nearest(x, i, &snapshot, effective_k, true);
            if neighbors.iter().any(|&n| y[n] != y[i]) {
                to_remove.push(i);
            }
        }
        for i in to_remove {
            remaining[i] = false;
        }
    }
    let mut result = ResampleResult {
        x: Vec::new(),
        y: Vec::new(),
        synthetic_flags: Vec::new(),
        notes: Vec::new(),
    };
    for i in 0..y.len() {
        if remaining[i] {
            result.x.push(x[i].clone());
            result.y.push(y[i]);
            result.synthetic_flags.push(false);
        }
    }
    Ok(result)
}
