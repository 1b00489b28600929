//! `experiment`: cross-validation or temporal-window evaluation, with an
//! optional paired t-test between two classifier specs.

use serde::Serialize;

use exploit_detect::balance::SamplerConfig;
use exploit_detect::eval::{
    cross_validate, paired_ttest, temporal_experiment, CrossValidationReport, FoldAudit,
    MetricsResult, PrCurve, TTestResult,
};
use exploit_detect::features::build_matrix;
use exploit_detect::learn::ClassifierSpec;
use exploit_detect::model::{assemble_dataset, AssemblyDiagnostics, Dataset};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::corpus::{ensure_output_dir, write_json, Corpus};
use crate::CliError;

pub const REPORT_FILE: &str = "experiment_report.json";

#[derive(Serialize)]
struct ExperimentEcho {
    kind: &'static str,
    label: &'static str,
    k: usize,
    seed: u64,
    year_range: [u16; 2],
    sampler: SamplerConfig,
    train_years: Option<Vec<u16>>,
    test_year: Option<u16>,
}

#[derive(Serialize)]
struct DatasetBlock {
    instances: usize,
    positives: usize,
    assembly_diagnostics: AssemblyDiagnostics,
}

#[derive(Serialize)]
struct ClassifierResult {
    classifier: String,
    per_fold: Option<Vec<MetricsResult>>,
    mean: MetricsResult,
    average_precision: f64,
    pr_curve_file: String,
    audits: Option<Vec<FoldAudit>>,
}

#[derive(Serialize)]
struct TTestBlock {
    comparing: [String; 2],
    #[serde(flatten)]
    result: TTestResult,
}

#[derive(Serialize)]
struct ExperimentReport {
    experiment: ExperimentEcho,
    dataset: DatasetBlock,
    results: Vec<ClassifierResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ttest: Option<TTestBlock>,
}

fn write_curve(
    cfg: &ExperimentConfig,
    spec: &ClassifierSpec,
    curve: &PrCurve,
) -> Result<String, CliError> {
    let name = format!("pr_curve_{}.csv", spec.kind.to_string().to_lowercase());
    let path = cfg.output_dir.join(&name);
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::input(anyhow::anyhow!("creating {}: {e}", path.display())))?;
    curve
        .write_csv(file)
        .map_err(|e| CliError::pipeline("report", anyhow::anyhow!(e)))?;
    Ok(name)
}

fn run_cv(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
) -> Result<(Vec<ClassifierResult>, Option<TTestBlock>), CliError> {
    let (x, y_rw, y_poc) =
        build_matrix(dataset).map_err(|e| CliError::pipeline("features", anyhow::anyhow!(e)))?;
    let y = match cfg.label {
        exploit_detect::eval::LabelColumn::Rw => y_rw,
        exploit_detect::eval::LabelColumn::Poc => y_poc,
    };
    let mut results = Vec::new();
    let mut reports: Vec<CrossValidationReport> = Vec::new();
    for spec in &cfg.classifiers {
        let report = cross_validate(spec, &cfg.sampler, &x, &y, cfg.k, cfg.seed)
            .map_err(|e| CliError::pipeline("cross-validation", anyhow::anyhow!(e)))?;
        let curve_file = write_curve(cfg, spec, &report.curve)?;
        results.push(ClassifierResult {
            classifier: spec.kind.to_string(),
            per_fold: Some(report.per_fold.clone()),
            mean: report.mean,
            average_precision: report.curve.average_precision,
            pr_curve_file: curve_file,
            audits: Some(report.audits.clone()),
        });
        reports.push(report);
    }
    let ttest = if reports.len() == 2 {
        let result = paired_ttest(&reports[0].fold_fscores(), &reports[1].fold_fscores())
            .map_err(|e| CliError::pipeline("t-test", anyhow::anyhow!(e)))?;
        Some(TTestBlock {
            comparing: [
                cfg.classifiers[0].kind.to_string(),
                cfg.classifiers[1].kind.to_string(),
            ],
            result,
        })
    } else {
        None
    };
    Ok((results, ttest))
}

fn run_temporal(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
) -> Result<(Vec<ClassifierResult>, Option<TTestBlock>), CliError> {
    let train_years = cfg.train_years.clone().expect("validated for TEMPORAL");
    let test_year = cfg.test_year.expect("validated for TEMPORAL");
    let mut results = Vec::new();
    let mut fold_scores: Vec<Option<Vec<f64>>> = Vec::new();
    for spec in &cfg.classifiers {
        let report = temporal_experiment(
            dataset,
            cfg.label,
            &train_years,
            test_year,
            spec,
            &cfg.sampler,
            cfg.k,
            cfg.seed,
        )
        .map_err(|e| CliError::pipeline("temporal-experiment", anyhow::anyhow!(e)))?;
        let curve_file = write_curve(cfg, spec, &report.curve)?;
        fold_scores.push(report.cv.as_ref().map(|cv| cv.fold_fscores()));
        results.push(ClassifierResult {
            classifier: spec.kind.to_string(),
            per_fold: report.cv.as_ref().map(|cv| cv.per_fold.clone()),
            mean: report.metrics,
            average_precision: report.curve.average_precision,
            pr_curve_file: curve_file,
            audits: report.cv.as_ref().map(|cv| cv.audits.clone()),
        });
    }
    // A paired test needs per-fold scores, which only the single-year mode
    // (delegating to CV) produces.
    let ttest = match (&fold_scores.first(), &fold_scores.get(1)) {
        (Some(Some(a)), Some(Some(b))) => {
            let result =
                paired_ttest(a, b).map_err(|e| CliError::pipeline("t-test", anyhow::anyhow!(e)))?;
            Some(TTestBlock {
                comparing: [
                    cfg.classifiers[0].kind.to_string(),
                    cfg.classifiers[1].kind.to_string(),
                ],
                result,
            })
        }
        _ => None,
    };
    Ok((results, ttest))
}

pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let corpus = Corpus::load(&cfg.output_dir).map_err(CliError::input)?;
    ensure_output_dir(&cfg.output_dir).map_err(CliError::input)?;
    let keywords = super::features::load_keywords(cfg)?;
    let labels = super::labels_from_corpus(cfg, &corpus)?;
    let (dataset, assembly_diagnostics) = assemble_dataset(
        &corpus.records,
        &corpus.tweets,
        &labels,
        cfg.year_range.clone(),
        &keywords,
    );
    let positives = dataset
        .instances()
        .iter()
        .filter(|i| cfg.label.of(i))
        .count();

    let (results, ttest) = match cfg.kind {
        ExperimentKind::Cv => run_cv(cfg, &dataset)?,
        ExperimentKind::Temporal => run_temporal(cfg, &dataset)?,
        ExperimentKind::Coverage => {
            return Err(CliError::input(anyhow::anyhow!(
                "experiment kind COVERAGE is served by the `coverage` command"
            )))
        }
    };

    let report = ExperimentReport {
        experiment: ExperimentEcho {
            kind: match cfg.kind {
                ExperimentKind::Cv => "CV",
                ExperimentKind::Temporal => "TEMPORAL",
                ExperimentKind::Coverage => "COVERAGE",
            },
            label: match cfg.label {
                exploit_detect::eval::LabelColumn::Rw => "RW",
                exploit_detect::eval::LabelColumn::Poc => "POC",
            },
            k: cfg.k,
            seed: cfg.seed,
            year_range: [*cfg.year_range.start(), *cfg.year_range.end()],
            sampler: cfg.sampler.clone(),
            train_years: cfg
                .train_years
                .as_ref()
                .map(|y| y.iter().copied().collect()),
            test_year: cfg.test_year,
        },
        dataset: DatasetBlock {
            instances: dataset.len(),
            positives,
            assembly_diagnostics,
        },
        results,
        ttest,
    };
    write_json(&cfg.output_dir.join(REPORT_FILE), &report).map_err(CliError::input)?;
    for result in &report.results {
        println!(
            "{}: precision {:.4}, recall {:.4}, F {:.4}, AP {:.4}",
            result.classifier,
            result.mean.precision,
            result.mean.recall,
            result.mean.fscore,
            result.average_precision
        );
    }
    if let Some(t) = &report.ttest {
        println!(
            "paired t-test {} vs {}: t = {:.4}, p = {:.4}",
            t.comparing[0], t.comparing[1], t.result.t_statistic, t.result.p_value
        );
    }
    println!("report -> {}", cfg.output_dir.join(REPORT_FILE).display());
    Ok(())
}
