//! `ingest`: parse the four raw sources and persist the normalized corpus.

use std::collections::BTreeMap;

use exploit_detect::ingest::{
    load_poc_listing, load_tweets, parse_nvd_feed, parse_vendor_signatures, Vendor,
};

use crate::config::ExperimentConfig;
use crate::corpus::{ensure_output_dir, write_json, Corpus, IngestSummary, SUMMARY_FILE};
use crate::CliError;

pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    for (name, path) in [
        ("data.nvd", &cfg.data.nvd),
        ("data.tweets", &cfg.data.tweets),
        ("data.poc_listing", &cfg.data.poc_listing),
        ("data.poc_cve_map", &cfg.data.poc_cve_map),
    ] {
        if !path.is_file() {
            return Err(CliError::input(anyhow::anyhow!(
                "{name} path {} does not exist",
                path.display()
            )));
        }
    }
    for (vendor, dir) in &cfg.data.vendor_dirs {
        if !dir.exists() {
            return Err(CliError::input(anyhow::anyhow!(
                "vendor_dirs.{vendor} path {} does not exist",
                dir.display()
            )));
        }
    }

    let (records, nvd_diagnostics) =
        parse_nvd_feed(&cfg.data.nvd).map_err(|e| CliError::input(anyhow::anyhow!(e)))?;
    let (tweets, tweet_diagnostics) =
        load_tweets(&cfg.data.tweets).map_err(|e| CliError::input(anyhow::anyhow!(e)))?;
    let mut signatures = Vec::new();
    let mut vendor_diagnostics = BTreeMap::new();
    for (vendor_name, dir) in &cfg.data.vendor_dirs {
        let vendor: Vendor = vendor_name
            .parse()
            .map_err(|e| CliError::input(anyhow::anyhow!("{e}")))?;
        let (entries, diag) = parse_vendor_signatures(vendor, dir)
            .map_err(|e| CliError::input(anyhow::anyhow!(e)))?;
        signatures.extend(entries);
        vendor_diagnostics.insert(vendor.name().to_string(), diag);
    }
    let (poc_entries, poc_diagnostics) =
        load_poc_listing(&cfg.data.poc_listing, &cfg.data.poc_cve_map)
            .map_err(|e| CliError::input(anyhow::anyhow!(e)))?;

    let corpus = Corpus {
        records,
        tweets,
        signatures,
        poc_entries,
    };
    let summary = IngestSummary {
        cve_records: corpus.records.len(),
        tweets: corpus.tweets.len(),
        vendor_signatures: corpus.signatures.len(),
        poc_entries: corpus.poc_entries.len(),
        nvd_diagnostics,
        tweet_diagnostics,
        vendor_diagnostics,
        poc_diagnostics,
    };

    ensure_output_dir(&cfg.output_dir).map_err(CliError::input)?;
    corpus.save(&cfg.output_dir).map_err(CliError::input)?;
    write_json(&cfg.output_dir.join(SUMMARY_FILE), &summary).map_err(CliError::input)?;
    println!(
        "ingested {} CVE records, {} tweets, {} signatures, {} PoC entries -> {}",
        summary.cve_records,
        summary.tweets,
        summary.vendor_signatures,
        summary.poc_entries,
        cfg.output_dir.display()
    );
    Ok(())
}
