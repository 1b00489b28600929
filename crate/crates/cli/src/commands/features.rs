//! `features`: assemble the dataset and export the feature matrix.

use exploit_detect::features::{write_matrix_csv, KeywordList};
use exploit_detect::model::assemble_dataset;

use crate::config::ExperimentConfig;
use crate::corpus::{ensure_output_dir, write_json, Corpus};
use crate::CliError;

pub const MATRIX_FILE: &str = "feature_matrix.csv";
pub const ASSEMBLY_FILE: &str = "assembly_diagnostics.json";

pub fn load_keywords(cfg: &ExperimentConfig) -> Result<KeywordList, CliError> {
    match &cfg.data.keywords {
        None => Ok(KeywordList::default_terms()),
        Some(path) => KeywordList::from_file(path)
            .map_err(|e| CliError::input(anyhow::anyhow!("keyword list: {e}"))),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let corpus = Corpus::load(&cfg.output_dir).map_err(CliError::input)?;
    ensure_output_dir(&cfg.output_dir).map_err(CliError::input)?;
    let keywords = load_keywords(cfg)?;
    let labels = super::labels_from_corpus(cfg, &corpus)?;
    let (dataset, diagnostics) = assemble_dataset(
        &corpus.records,
        &corpus.tweets,
        &labels,
        cfg.year_range.clone(),
        &keywords,
    );
    let path = cfg.output_dir.join(MATRIX_FILE);
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::input(anyhow::anyhow!("creating {}: {e}", path.display())))?;
    write_matrix_csv(file, &dataset)
        .map_err(|e| CliError::pipeline("features", anyhow::anyhow!(e)))?;
    write_json(&cfg.output_dir.join(ASSEMBLY_FILE), &diagnostics).map_err(CliError::input)?;
    println!(
        "assembled {} instances ({} features each) -> {}",
        dataset.len(),
        dataset.schema().len(),
        path.display()
    );
    Ok(())
}
