//! Experiment configuration: a TOML file plus per-flag overrides.
//!
//! Unknown keys are rejected so typos fail loudly before any work starts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use exploit_detect::balance::{SamplerConfig, DEFAULT_K, DEFAULT_K_MAX, DEFAULT_TARGET_RATIO};
use exploit_detect::eval::LabelColumn;
use exploit_detect::groundtruth::Source;
use exploit_detect::ingest::Vendor;
use exploit_detect::learn::{ClassifierKind, ClassifierSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub nvd: PathBuf,
    pub tweets: PathBuf,
    pub poc_listing: PathBuf,
    pub poc_cve_map: PathBuf,
    /// Optional 36-term keyword file; the built-in list is used when absent.
    pub keywords: Option<PathBuf>,
    #[serde(default)]
    pub vendor_dirs: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthSection {
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "CV")]
    Cv,
    #[serde(rename = "TEMPORAL")]
    Temporal,
    #[serde(rename = "COVERAGE")]
    Coverage,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub label: String,
    #[serde(default = "default_k")]
    pub k: usize,
    pub seed: u64,
    /// Inclusive [start, end] disclosure-year window.
    pub year_range: [u16; 2],
    pub train_years: Option<Vec<u16>>,
    pub test_year: Option<u16>,
    pub output_dir: PathBuf,
}

fn default_k() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub kind: String,
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub target_ratio: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    data: DataSection,
    ground_truth: GroundTruthSection,
    experiment: ExperimentSection,
    #[serde(default)]
    classifier: Vec<ClassifierSection>,
    sampler: Option<SamplerSection>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub label: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub kind: Option<String>,
    pub test_year: Option<u16>,
    pub train_years: Option<Vec<u16>>,
    pub year_range: Option<[u16; 2]>,
}

/// A validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub sources: BTreeSet<Source>,
    pub kind: ExperimentKind,
    pub label: LabelColumn,
    pub k: usize,
    pub seed: u64,
    pub year_range: std::ops::RangeInclusive<u16>,
    pub train_years: Option<BTreeSet<u16>>,
    pub test_year: Option<u16>,
    pub output_dir: PathBuf,
    pub classifiers: Vec<ClassifierSpec>,
    pub sampler: SamplerConfig,
}

fn parse_classifier_kind(name: &str) -> anyhow::Result<ClassifierKind> {
    match name.to_ascii_uppercase().as_str() {
        "LOGISTIC" => Ok(ClassifierKind::Logistic),
        "LINEAR_SVM" => Ok(ClassifierKind::LinearSvm),
        "GBDT" => Ok(ClassifierKind::Gbdt),
        other => {
            bail!("unknown classifier kind {other:?} (expected LOGISTIC, LINEAR_SVM, or GBDT)")
        }
    }
}

fn parse_sampler(section: &SamplerSection) -> anyhow::Result<SamplerConfig> {
    let ratio = section.target_ratio.unwrap_or(DEFAULT_TARGET_RATIO);
    let k = section.k.unwrap_or(DEFAULT_K);
    let k_max = section.k_max.unwrap_or(DEFAULT_K_MAX);
    Ok(match section.kind.to_ascii_uppercase().as_str() {
        "NONE" => SamplerConfig::None,
        "RUS" => SamplerConfig::Rus {
            target_ratio: ratio,
        },
        "SMOTE" => SamplerConfig::Smote {
            k,
            target_ratio: ratio,
        },
        "ADASYN" => SamplerConfig::Adasyn {
            k,
            target_ratio: ratio,
        },
        "ALLKNN" => SamplerConfig::AllKnn { k_max },
        other => bail!("unknown sampler kind {other:?}"),
    })
}

fn parse_label(name: &str) -> anyhow::Result<LabelColumn> {
    match name.to_ascii_uppercase().as_str() {
        "RW" => Ok(LabelColumn::Rw),
        "POC" => Ok(LabelColumn::Poc),
        other => bail!("unknown label column {other:?} (expected RW or POC)"),
    }
}

impl ExperimentConfig {
    /// Load, apply overrides, and validate.
    pub fn load(path: &Path, overrides: &Overrides) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut raw: RawConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;

        if let Some(seed) = overrides.seed {
            raw.experiment.seed = seed;
        }
        if let Some(k) = overrides.k {
            raw.experiment.k = k;
        }
        if let Some(label) = &overrides.label {
            raw.experiment.label = label.clone();
        }
        if let Some(dir) = &overrides.output_dir {
            raw.experiment.output_dir = dir.clone();
        }
        if let Some(kind) = &overrides.kind {
            raw.experiment.kind = match kind.to_ascii_uppercase().as_str() {
                "CV" => ExperimentKind::Cv,
                "TEMPORAL" => ExperimentKind::Temporal,
                "COVERAGE" => ExperimentKind::Coverage,
                other => bail!("unknown experiment kind {other:?}"),
            };
        }
        if let Some(year) = overrides.test_year {
            raw.experiment.test_year = Some(year);
        }
        if let Some(years) = &overrides.train_years {
            raw.experiment.train_years = Some(years.clone());
        }
        if let Some(range) = overrides.year_range {
            raw.experiment.year_range = range;
        }

        raw.validate()
    }
}

impl RawConfig {
    fn validate(self) -> anyhow::Result<ExperimentConfig> {
        let mut sources = BTreeSet::new();
        for name in &self.ground_truth.sources {
            sources.insert(name.parse::<Source>().map_err(|e| anyhow::anyhow!("{e}"))?);
        }
        if sources.is_empty() {
            bail!("ground_truth.sources must not be empty");
        }
        for vendor_name in self.data.vendor_dirs.keys() {
            vendor_name
                .parse::<Vendor>()
                .map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        let [start, end] = self.experiment.year_range;
        if start > end {
            bail!("experiment.year_range start {start} exceeds end {end}");
        }
        if self.experiment.k < 2 {
            bail!("experiment.k must be at least 2");
        }
        let label = parse_label(&self.experiment.label)?;
        if self.classifier.len() > 2 {
            bail!("at most two classifier blocks are supported (the second enables the paired t-test)");
        }
        let mut classifiers = Vec::new();
        for section in &self.classifier {
            let kind = parse_classifier_kind(&section.kind)?;
            classifiers.push(
                ClassifierSpec::new(kind, &section.params, self.experiment.seed)
                    .map_err(|e| anyhow::anyhow!("classifier {}: {e}", section.kind))?,
            );
        }
        let sampler = match &self.sampler {
            None => SamplerConfig::None,
            Some(section) => parse_sampler(section)?,
        };
        let kind = self.experiment.kind;
        if kind == ExperimentKind::Temporal {
            if self.experiment.test_year.is_none() {
                bail!("TEMPORAL experiments need experiment.test_year");
            }
            if self
                .experiment
                .train_years
                .as_ref()
                .is_none_or(|y| y.is_empty())
            {
                bail!("TEMPORAL experiments need a nonempty experiment.train_years");
            }
        }
        if matches!(kind, ExperimentKind::Cv | ExperimentKind::Temporal) && classifiers.is_empty() {
            bail!("experiments need at least one [[classifier]] block");
        }
        Ok(ExperimentConfig {
            data: self.data,
            sources,
            kind,
            label,
            k: self.experiment.k,
            seed: self.experiment.seed,
            year_range: start..=end,
            train_years: self.experiment.train_years.map(|y| y.into_iter().collect()),
            test_year: self.experiment.test_year,
            output_dir: self.experiment.output_dir,
            classifiers,
            sampler,
        })
    }
}
