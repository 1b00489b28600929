//! Normalized-corpus persistence between pipeline stages.
//!
//! `ingest` writes these files into the output directory; the later stages
//! read them back. Serialization is deterministic: re-running a stage over
//! unchanged inputs reproduces every byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use exploit_detect::ingest::{Diagnostics, PocEntry, VendorSignatureEntry};
use exploit_detect::model::{CveRecord, TweetRecord};

pub const CVE_RECORDS_FILE: &str = "cve_records.json";
pub const TWEETS_FILE: &str = "tweets.json";
pub const SIGNATURES_FILE: &str = "vendor_signatures.json";
pub const POC_FILE: &str = "poc_entries.json";
pub const SUMMARY_FILE: &str = "ingest_summary.json";

/// Per-source record counts and parse diagnostics from one ingest run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub cve_records: usize,
    pub tweets: usize,
    pub vendor_signatures: usize,
    pub poc_entries: usize,
    pub nvd_diagnostics: Diagnostics,
    pub tweet_diagnostics: Diagnostics,
    pub vendor_diagnostics: BTreeMap<String, Diagnostics>,
    pub poc_diagnostics: Diagnostics,
}

/// The normalized corpus produced by `ingest`.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<CveRecord>,
    pub tweets: Vec<TweetRecord>,
    pub signatures: Vec<VendorSignatureEntry>,
    pub poc_entries: Vec<PocEntry>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("serializing {}", path.display()))?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl Corpus {
    pub fn save(&self, dir: &Path) -> anyhow::Result<()> {
        write_json(&dir.join(CVE_RECORDS_FILE), &self.records)?;
        write_json(&dir.join(TWEETS_FILE), &self.tweets)?;
        write_json(&dir.join(SIGNATURES_FILE), &self.signatures)?;
        write_json(&dir.join(POC_FILE), &self.poc_entries)?;
        Ok(())
    }

    /// Load a corpus previously written by `ingest`; the error names the
    /// first missing file.
    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        for file in [CVE_RECORDS_FILE, TWEETS_FILE, SIGNATURES_FILE, POC_FILE] {
            let path = dir.join(file);
            if !path.is_file() {
                anyhow::bail!(
                    "normalized corpus file {} not found; run `ingest` first",
                    path.display()
                );
            }
        }
        Ok(Corpus {
            records: read_json(&dir.join(CVE_RECORDS_FILE))?,
            tweets: read_json(&dir.join(TWEETS_FILE))?,
            signatures: read_json(&dir.join(SIGNATURES_FILE))?,
            poc_entries: read_json(&dir.join(POC_FILE))?,
        })
    }
}

/// Output path helper that creates the directory on first use.
pub fn ensure_output_dir(dir: &PathBuf) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
}
