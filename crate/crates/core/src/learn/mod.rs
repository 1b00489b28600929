//! Classifiers behind a common train/score interface: L2-regularized
//! logistic regression, a linear SVM trained by seeded subgradient descent,
//! and a gradient-boosted decision-tree ensemble fit to logistic-loss
//! gradients.
//!
//! Probability models (logistic, boosted trees) score in `(0, 1)`; the SVM
//! scores signed margins. [`TrainedModel::default_threshold`] gives the
//! matching decision threshold (0.5 / 0).

mod gbdt;
mod logistic;
mod svm;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gbdt::{GbdtModel, RegressionTree};
pub use logistic::objective_and_gradient;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("training needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("feature dimensionality {got} does not match the model's {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("input matrix is empty or ragged")]
    BadMatrix,
    #[error("unknown hyperparameter {name:?} for {kind}")]
    UnknownHyperparameter { kind: ClassifierKind, name: String },
    #[error("hyperparameter {name} = {value} is invalid: {constraint}")]
    InvalidHyperparameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("unsupported model document version {0}")]
    UnsupportedVersion(u32),
    #[error("model io error: {0}")]
    Io(String),
}

/// The classifier families compared by the experiment runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassifierKind {
    Logistic,
    LinearSvm,
    Gbdt,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ClassifierKind::Logistic => "LOGISTIC",
            ClassifierKind::LinearSvm => "LINEAR_SVM",
            ClassifierKind::Gbdt => "GBDT",
        };
        f.write_str(name)
    }
}

/// Logistic-regression knobs: full-batch gradient descent on mean logistic
/// loss plus `lambda * ||w||^2`, bias unregularized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub lambda: f64,
    pub learning_rate: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1e-3,
            learning_rate: 0.1,
            tol: 1e-6,
            max_iters: 5000,
        }
    }
}

/// Linear-SVM knobs: seeded stochastic subgradient descent on mean hinge
/// loss plus `lambda * ||w||^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-3,
            learning_rate: 0.1,
            epochs: 200,
        }
    }
}

/// Boosted-trees knobs: depth-limited regression trees on logistic-loss
/// gradients with Newton leaf values and shrinkage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            n_trees: 200,
            depth: 4,
            learning_rate: 0.1,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
enum Params {
    Logistic(LogisticParams),
    LinearSvm(SvmParams),
    Gbdt(GbdtParams),
}

/// A validated classifier configuration: kind, hyperparameters, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub seed: u64,
    params: Params,
}

fn require(
    name: &'static str,
    value: f64,
    constraint: &'static str,
    ok: bool,
) -> Result<f64, LearnError> {
    if ok {
        Ok(value)
    } else {
        Err(LearnError::InvalidHyperparameter {
            name,
            value,
            constraint,
        })
    }
}

fn as_count(name: &'static str, value: f64, min: usize) -> Result<usize, LearnError> {
    let ok = value.is_finite() && value >= min as f64 && value.fract() == 0.0;
    require(name, value, "non-negative integer", ok)?;
    Ok(value as usize)
}

impl ClassifierSpec {
    /// Build a spec from a name -> value map, applying defaults for any knob
    /// not mentioned. Unknown names and out-of-range values are rejected.
    pub fn new(
        kind: ClassifierKind,
        overrides: &BTreeMap<String, f64>,
        seed: u64,
    ) -> Result<Self, LearnError> {
        let params = match kind {
            ClassifierKind::Logistic => {
                let mut p = LogisticParams::default();
                for (name, &value) in overrides {
                    match name.as_str() {
                        "lambda" => {
                            p.lambda =
                                require("lambda", value, ">= 0", value.is_finite() && value >= 0.0)?
                        }
                        "learning_rate" => {
                            p.learning_rate = require(
                                "learning_rate",
                                value,
                                "> 0",
                                value.is_finite() && value > 0.0,
                            )?
                        }
                        "tol" => {
                            p.tol =
                                require("tol", value, ">= 0", value.is_finite() && value >= 0.0)?
                        }
                        "max_iters" => p.max_iters = as_count("max_iters", value, 1)?,
                        _ => {
                            return Err(LearnError::UnknownHyperparameter {
                                kind,
                                name: name.clone(),
                            })
                        }
                    }
                }
                Params::Logistic(p)
            }
            ClassifierKind::LinearSvm => {
                let mut p = SvmParams::default();
                for (name, &value) in overrides {
                    match name.as_str() {
                        "lambda" => {
                            p.lambda =
                                require("lambda", value, ">= 0", value.is_finite() && value >= 0.0)?
                        }
                        "learning_rate" => {
                            p.learning_rate = require(
                                "learning_rate",
                                value,
                                "> 0",
                                value.is_finite() && value > 0.0,
                            )?
                        }
                        "epochs" => p.epochs = as_count("epochs", value, 1)?,
                        _ => {
                            return Err(LearnError::UnknownHyperparameter {
                                kind,
                                name: name.clone(),
                            })
                        }
                    }
                }
                Params::LinearSvm(p)
            }
            ClassifierKind::Gbdt => {
                let mut p = GbdtParams::default();
                for (name, &value) in overrides {
                    match name.as_str() {
                        "n_trees" => p.n_trees = as_count("n_trees", value, 0)?,
                        "depth" => p.depth = as_count("depth", value, 1)?,
                        "learning_rate" => {
                            p.learning_rate = require(
                                "learning_rate",
                                value,
                                "> 0",
                                value.is_finite() && value > 0.0,
                            )?
                        }
                        "min_leaf" => p.min_leaf = as_count("min_leaf", value, 1)?,
                        _ => {
                            return Err(LearnError::UnknownHyperparameter {
                                kind,
                                name: name.clone(),
                            })
                        }
                    }
                }
                Params::Gbdt(p)
            }
        };
        Ok(ClassifierSpec { kind, seed, params })
    }

    pub fn logistic(seed: u64) -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Logistic,
            seed,
            params: Params::Logistic(LogisticParams::default()),
        }
    }

    pub fn linear_svm(seed: u64) -> Self {
        ClassifierSpec {
            kind: ClassifierKind::LinearSvm,
            seed,
            params: Params::LinearSvm(SvmParams::default()),
        }
    }

    pub fn gbdt(seed: u64) -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Gbdt,
            seed,
            params: Params::Gbdt(GbdtParams::default()),
        }
    }

    /// Same spec with a different seed (used for per-fold derivation).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        spec.seed = seed;
        spec
    }

    pub fn logistic_params(&self) -> Option<&LogisticParams> {
        match &self.params {
            Params::Logistic(p) => Some(p),
            _ => None,
        }
    }

    pub fn svm_params(&self) -> Option<&SvmParams> {
        match &self.params {
            Params::LinearSvm(p) => Some(p),
            _ => None,
        }
    }

    pub fn gbdt_params(&self) -> Option<&GbdtParams> {
        match &self.params {
            Params::Gbdt(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ModelParams {
    /// Linear model; `probabilistic` selects the logistic link for scoring.
    Linear {
        weights: Vec<f64>,
        bias: f64,
        probabilistic: bool,
    },
    Gbdt(GbdtModel),
}

/// An immutable fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    n_features: usize,
    params: ModelParams,
}

const MODEL_DOC_VERSION: u32 = 1;

/// On-disk form of a model: a versioned JSON document.
#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    model: TrainedModel,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_training_input(x: &[Vec<f64>], y: &[bool]) -> Result<usize, LearnError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(LearnError::BadMatrix);
    }
    if x.len() < 2 {
        return Err(LearnError::TooFewRows(x.len()));
    }
    let width = x[0].len();
    for (row, r) in x.iter().enumerate() {
        if r.len() != width {
            return Err(LearnError::BadMatrix);
        }
        for (column, v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(LearnError::NonFiniteFeature { row, column });
            }
        }
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(LearnError::SingleClass);
    }
    Ok(width)
}

/// Train a model of the spec's kind on the given rows.
pub fn fit(spec: &ClassifierSpec, x: &[Vec<f64>], y: &[bool]) -> Result<TrainedModel, LearnError> {
    let n_features = check_training_input(x, y)?;
    let params = match &spec.params {
        Params::Logistic(p) => {
            let (weights, bias) = logistic::fit_logistic(p, x, y);
            ModelParams::Linear {
                weights,
                bias,
                probabilistic: true,
            }
        }
        Params::LinearSvm(p) => {
            let (weights, bias) = svm::fit_svm(p, x, y, spec.seed);
            ModelParams::Linear {
                weights,
                bias,
                probabilistic: false,
            }
        }
        Params::Gbdt(p) => ModelParams::Gbdt(gbdt::fit_gbdt(p, x, y)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features,
        params,
    })
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Decision threshold matching the score space: 0.5 for probabilities,
    /// 0 for margins.
    pub fn default_threshold(&self) -> f64 {
        match &self.params {
            ModelParams::Linear {
                probabilistic: false,
                ..
            } => 0.0,
            _ => 0.5,
        }
    }

    pub fn score_one(&self, row: &[f64]) -> Result<f64, LearnError> {
        if row.len() != self.n_features {
            return Err(LearnError::DimensionMismatch {
                got: row.len(),
                expected: self.n_features,
            });
        }
        Ok(match &self.params {
            ModelParams::Linear {
                weights,
                bias,
                probabilistic,
            } => {
                let z = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
                if *probabilistic {
                    sigmoid(z)
                } else {
                    z
                }
            }
            ModelParams::Gbdt(model) => model.predict_probability(row),
        })
    }

    /// Scores for a batch of rows; higher means more likely exploited.
    pub fn score(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, LearnError> {
        x.iter().map(|row| self.score_one(row)).collect()
    }

    /// Threshold the scores: `score >= threshold` predicts the positive
    /// class.
    pub fn predict(&self, x: &[Vec<f64>], threshold: f64) -> Result<Vec<bool>, LearnError> {
        Ok(self.score(x)?.into_iter().map(|s| s >= threshold).collect())
    }

    /// Per-iteration training loss, recorded for boosted-tree models.
    pub fn training_loss_curve(&self) -> Option<&[f64]> {
        match &self.params {
            ModelParams::Gbdt(model) => Some(&model.loss_curve),
            _ => None,
        }
    }

    /// Serialize as a versioned JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDocument {
            version: MODEL_DOC_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    /// Parse a versioned JSON document.
    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| LearnError::Io(e.to_string()))?;
        if doc.version != MODEL_DOC_VERSION {
            return Err(LearnError::UnsupportedVersion(doc.version));
        }
        Ok(doc.model)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.to_json()).map_err(|e| LearnError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|e| LearnError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}
