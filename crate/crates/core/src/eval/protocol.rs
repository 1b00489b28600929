//! Cross-validation and temporal-window experiment protocols.
//!
//! Per fold: fit the standardizer on the training rows only, transform both
//! partitions, resample the training rows only, fit, then score the test
//! rows. Point metrics are averaged arithmetically across folds; the pooled
//! out-of-fold scores feed a single PR curve. Every stage's randomness is
//! derived from the experiment seed via [`crate::seeds::derive_seed`], so a
//! fold can be reproduced in isolation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::balance::SamplerConfig;
use crate::features::{fit_standardizer, Standardizer};
use crate::learn::{fit, ClassifierSpec, TrainedModel};
use crate::model::Dataset;
use crate::seeds::{derive_seed, fnv1a64};

use super::folds::stratified_kfold;
use super::metrics::{point_metrics, pr_curve, MetricsResult, PrCurve};
use super::EvalError;

/// Which label column an experiment trains against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LabelColumn {
    Rw,
    Poc,
}

impl LabelColumn {
    pub fn of(self, instance: &crate::model::Instance) -> bool {
        match self {
            LabelColumn::Rw => instance.label_rw,
            LabelColumn::Poc => instance.label_poc,
        }
    }
}

/// Per-fold bookkeeping proving that only training rows influenced the
/// fitted artifacts: the standardizer is recorded verbatim and the model is
/// fingerprinted, so both can be recomputed from the training indices alone
/// and compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAudit {
    pub fold: usize,
    pub train_count: usize,
    pub test_count: usize,
    /// Training rows after resampling.
    pub resampled_count: usize,
    /// Synthetic rows among them.
    pub synthetic_count: usize,
    pub standardizer: Standardizer,
    /// FNV-1a of the serialized model document.
    pub model_fingerprint: u64,
}

/// Outcome of one stratified cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub per_fold: Vec<MetricsResult>,
    pub mean: MetricsResult,
    /// PR curve over the pooled out-of-fold scores.
    pub curve: PrCurve,
    pub audits: Vec<FoldAudit>,
}

impl CrossValidationReport {
    pub fn fold_fscores(&self) -> Vec<f64> {
        self.per_fold.iter().map(|m| m.fscore).collect()
    }
}

fn mean_metrics(per_fold: &[MetricsResult]) -> MetricsResult {
    let k = per_fold.len() as f64;
    MetricsResult {
        precision: per_fold.iter().map(|m| m.precision).sum::<f64>() / k,
        recall: per_fold.iter().map(|m| m.recall).sum::<f64>() / k,
        fscore: per_fold.iter().map(|m| m.fscore).sum::<f64>() / k,
    }
}

fn select_rows(x: &[Vec<f64>], indices: &[usize]) -> Vec<Vec<f64>> {
    indices.iter().map(|&i| x[i].clone()).collect()
}

fn select_labels(y: &[bool], indices: &[usize]) -> Vec<bool> {
    indices.iter().map(|&i| y[i]).collect()
}

/// Fit and score one train/test split; shared by the CV folds and the
/// temporal protocol. Returns the scores for the test rows plus the audit
/// ingredients.
#[allow(clippy::type_complexity)]
fn run_split(
    spec: &ClassifierSpec,
    sampler: &SamplerConfig,
    x_train: &[Vec<f64>],
    y_train: &[bool],
    x_test: &[Vec<f64>],
    sampler_seed: u64,
    fit_seed: u64,
) -> Result<(Vec<f64>, TrainedModel, Standardizer, usize, usize), EvalError> {
    let standardizer = fit_standardizer(x_train)?;
    let x_train_std = standardizer.transform(x_train);
    let x_test_std = standardizer.transform(x_test);
    let resampled = sampler.apply(&x_train_std, y_train, sampler_seed)?;
    let synthetic_count = resampled.synthetic_flags.iter().filter(|&&f| f).count();
    let resampled_count = resampled.y.len();
    let model = fit(&spec.with_seed(fit_seed), &resampled.x, &resampled.y)?;
    let scores = model.score(&x_test_std)?;
    Ok((
        scores,
        model,
        standardizer,
        resampled_count,
        synthetic_count,
    ))
}

/// Stratified k-fold cross-validation of one classifier/sampler pairing.
pub fn cross_validate(
    spec: &ClassifierSpec,
    sampler: &SamplerConfig,
    x: &[Vec<f64>],
    y: &[bool],
    k: usize,
    seed: u64,
) -> Result<CrossValidationReport, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let folds = stratified_kfold(y, k, derive_seed(seed, "folds", 0))?;
    let mut per_fold = Vec::with_capacity(k);
    let mut audits = Vec::with_capacity(k);
    let mut pooled_scores = vec![0.0; y.len()];
    for fold in 0..k {
        let train_idx = folds.train_indices(fold);
        let test_idx = folds.test_indices(fold);
        let x_train = select_rows(x, &train_idx);
        let y_train = select_labels(y, &train_idx);
        let x_test = select_rows(x, &test_idx);
        let y_test = select_labels(y, &test_idx);
        let (scores, model, standardizer, resampled_count, synthetic_count) = run_split(
            spec,
            sampler,
            &x_train,
            &y_train,
            &x_test,
            derive_seed(seed, "resample", fold as u64),
            derive_seed(seed, "fit", fold as u64),
        )?;
        let threshold = model.default_threshold();
        let predictions: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
        per_fold.push(point_metrics(&y_test, &predictions)?);
        for (&index, &score) in test_idx.iter().zip(&scores) {
            pooled_scores[index] = score;
        }
        audits.push(FoldAudit {
            fold,
            train_count: train_idx.len(),
            test_count: test_idx.len(),
            resampled_count,
            synthetic_count,
            standardizer,
            model_fingerprint: fnv1a64(model.to_json().as_bytes()),
        });
    }
    let mean = mean_metrics(&per_fold);
    let curve = pr_curve(y, &pooled_scores)?;
    Ok(CrossValidationReport {
        per_fold,
        mean,
        curve,
        audits,
    })
}

/// Outcome of a temporal-window experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalReport {
    pub train_years: Vec<u16>,
    pub test_year: u16,
    pub metrics: MetricsResult,
    pub curve: PrCurve,
    /// Present in single-year mode, which delegates to cross-validation.
    pub cv: Option<CrossValidationReport>,
}

/// Train on the instances of `train_years` and evaluate on `test_year`.
///
/// When `train_years == {test_year}` the experiment degenerates to in-year
/// stratified cross-validation. Any other overlap is an error, as are empty
/// train or test partitions.
#[allow(clippy::too_many_arguments)]
pub fn temporal_experiment(
    dataset: &Dataset,
    label: LabelColumn,
    train_years: &BTreeSet<u16>,
    test_year: u16,
    spec: &ClassifierSpec,
    sampler: &SamplerConfig,
    k: usize,
    seed: u64,
) -> Result<TemporalReport, EvalError> {
    if train_years.is_empty() {
        return Err(EvalError::EmptyPartition("train_years".to_string()));
    }
    let single_year_mode = train_years.len() == 1 && train_years.contains(&test_year);
    if !single_year_mode && train_years.contains(&test_year) {
        return Err(EvalError::OverlappingYears);
    }
    if single_year_mode {
        let instances = dataset.instances_for_year(test_year);
        if instances.is_empty() {
            return Err(EvalError::EmptyPartition(format!("year {test_year}")));
        }
        let x: Vec<Vec<f64>> = instances.iter().map(|i| i.features.clone()).collect();
        let y: Vec<bool> = instances.iter().map(|i| label.of(i)).collect();
        let cv = cross_validate(spec, sampler, &x, &y, k, seed)?;
        return Ok(TemporalReport {
            train_years: vec![test_year],
            test_year,
            metrics: cv.mean,
            curve: cv.curve.clone(),
            cv: Some(cv),
        });
    }

    let train: Vec<&crate::model::Instance> = dataset
        .instances()
        .iter()
        .filter(|i| train_years.contains(&i.year))
        .collect();
    let test: Vec<&crate::model::Instance> = dataset.instances_for_year(test_year);
    if train.is_empty() {
        return Err(EvalError::EmptyPartition(format!(
            "train years {train_years:?}"
        )));
    }
    if test.is_empty() {
        return Err(EvalError::EmptyPartition(format!("test year {test_year}")));
    }
    let x_train: Vec<Vec<f64>> = train.iter().map(|i| i.features.clone()).collect();
    let y_train: Vec<bool> = train.iter().map(|i| label.of(i)).collect();
    let x_test: Vec<Vec<f64>> = test.iter().map(|i| i.features.clone()).collect();
    let y_test: Vec<bool> = test.iter().map(|i| label.of(i)).collect();
    let (scores, model, _, _, _) = run_split(
        spec,
        sampler,
        &x_train,
        &y_train,
        &x_test,
        derive_seed(seed, "resample", 0),
        derive_seed(seed, "fit", 0),
    )?;
    let threshold = model.default_threshold();
    let predictions: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
    let metrics = point_metrics(&y_test, &predictions)?;
    let curve = pr_curve(&y_test, &scores)?;
    Ok(TemporalReport {
        train_years: train_years.iter().copied().collect(),
        test_year,
        metrics,
        curve,
        cv: None,
    })
}
