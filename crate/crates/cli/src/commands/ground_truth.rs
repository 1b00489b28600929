//! `ground-truth` and `coverage`: label-set construction plus the
//! coverage-by-year and three-set intersection reports.

use std::collections::BTreeSet;

use exploit_detect::groundtruth::{coverage_by_year, intersection_report};
use exploit_detect::ingest::Vendor;
use exploit_detect::model::CveId;

use crate::config::ExperimentConfig;
use crate::corpus::{ensure_output_dir, write_json, Corpus};
use crate::CliError;

pub const LABELS_FILE: &str = "labels.json";
pub const COVERAGE_CSV: &str = "coverage_by_year.csv";
pub const COVERAGE_JSON: &str = "coverage_by_year.json";
pub const INTERSECTION_JSON: &str = "intersection.json";
pub const INTERSECTION_CSV: &str = "intersection.csv";

/// Signature mentions for a set of vendors, restricted to the config's year
/// range.
fn vendor_mentions(cfg: &ExperimentConfig, corpus: &Corpus, vendors: &[Vendor]) -> BTreeSet<CveId> {
    corpus
        .signatures
        .iter()
        .filter(|s| vendors.contains(&s.vendor))
        .flat_map(|s| s.mentioned_cves.iter().cloned())
        .filter(|id| cfg.year_range.contains(&id.year()))
        .collect()
}

fn write_reports(cfg: &ExperimentConfig, corpus: &Corpus) -> Result<(), CliError> {
    let years: Vec<u16> = cfg.year_range.clone().collect();
    let per_source = super::per_source_cve_sets(cfg, corpus);
    let tweeted = super::tweeted_cves(corpus);
    let coverage = coverage_by_year(&per_source, &tweeted, &years);

    let csv_path = cfg.output_dir.join(COVERAGE_CSV);
    let file = std::fs::File::create(&csv_path)
        .map_err(|e| CliError::input(anyhow::anyhow!("creating {}: {e}", csv_path.display())))?;
    coverage
        .write_csv(file)
        .map_err(|e| CliError::pipeline("coverage", anyhow::anyhow!(e)))?;
    write_json(&cfg.output_dir.join(COVERAGE_JSON), &coverage).map_err(CliError::input)?;

    // Three-set decomposition: Symantec's signatures, the other vendors
    // combined, and the PoC archive.
    let symantec = vendor_mentions(cfg, corpus, &[Vendor::SymantecAv, Vendor::SymantecIps]);
    let others = vendor_mentions(
        cfg,
        corpus,
        &[
            Vendor::Avast,
            Vendor::Eset,
            Vendor::TrendMicro,
            Vendor::Kaspersky,
        ],
    );
    let edb: BTreeSet<CveId> = corpus
        .poc_entries
        .iter()
        .flat_map(|p| p.cve_ids.iter().cloned())
        .filter(|id| cfg.year_range.contains(&id.year()))
        .collect();
    let intersection = intersection_report(&symantec, &others, &edb);
    write_json(&cfg.output_dir.join(INTERSECTION_JSON), &intersection).map_err(CliError::input)?;
    let intersection_csv = format!(
        "region,count\nsymantec_only,{}\nothers_only,{}\nedb_only,{}\nsymantec_others,{}\nsymantec_edb,{}\nothers_edb,{}\nall_three,{}\nunion,{}\n",
        intersection.first_only,
        intersection.second_only,
        intersection.third_only,
        intersection.first_second_only,
        intersection.first_third_only,
        intersection.second_third_only,
        intersection.all_three,
        intersection.union_size(),
    );
    std::fs::write(cfg.output_dir.join(INTERSECTION_CSV), intersection_csv)
        .map_err(|e| CliError::input(anyhow::anyhow!(e)))?;
    Ok(())
}

/// `ground-truth`: labels plus both reports.
pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let corpus = Corpus::load(&cfg.output_dir).map_err(CliError::input)?;
    ensure_output_dir(&cfg.output_dir).map_err(CliError::input)?;
    let labels = super::labels_from_corpus(cfg, &corpus)?;
    write_json(&cfg.output_dir.join(LABELS_FILE), &labels).map_err(CliError::input)?;
    write_reports(cfg, &corpus)?;
    let rw = labels.rw_cves().len();
    let poc = labels.poc_cves().len();
    println!(
        "labeled {} CVEs ({rw} RW, {poc} PoC) from sources {:?} -> {}",
        labels.len(),
        cfg.sources.iter().map(|s| s.name()).collect::<Vec<_>>(),
        cfg.output_dir.display()
    );
    Ok(())
}

/// `coverage`: the reports alone, without persisting labels.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let corpus = Corpus::load(&cfg.output_dir).map_err(CliError::input)?;
    ensure_output_dir(&cfg.output_dir).map_err(CliError::input)?;
    write_reports(cfg, &corpus)?;
    println!("coverage reports written to {}", cfg.output_dir.display());
    Ok(())
}
