//! Subcommand implementations.

pub mod experiment;
pub mod features;
pub mod ground_truth;
pub mod ingest;

use std::collections::{BTreeMap, BTreeSet};

use exploit_detect::groundtruth::{merge_ground_truth, LabelSet, Source};
use exploit_detect::model::CveId;

use crate::config::ExperimentConfig;
use crate::corpus::Corpus;
use crate::CliError;

/// Merge the corpus evidence into labels under the configured selection.
pub fn labels_from_corpus(cfg: &ExperimentConfig, corpus: &Corpus) -> Result<LabelSet, CliError> {
    merge_ground_truth(&corpus.poc_entries, &corpus.signatures, &cfg.sources)
        .map_err(|e| CliError::input(anyhow::anyhow!(e)))
}

/// CVE sets mentioned by each selected source (EDB means the PoC listing).
pub fn per_source_cve_sets(
    cfg: &ExperimentConfig,
    corpus: &Corpus,
) -> BTreeMap<Source, BTreeSet<CveId>> {
    let mut sets: BTreeMap<Source, BTreeSet<CveId>> = BTreeMap::new();
    for source in &cfg.sources {
        sets.entry(*source).or_default();
    }
    if cfg.sources.contains(&Source::Edb) {
        let set = sets.entry(Source::Edb).or_default();
        for entry in &corpus.poc_entries {
            set.extend(entry.cve_ids.iter().cloned());
        }
    }
    for entry in &corpus.signatures {
        let source = Source::from(entry.vendor);
        if cfg.sources.contains(&source) {
            sets.entry(source)
                .or_default()
                .extend(entry.mentioned_cves.iter().cloned());
        }
    }
    sets
}

/// Distinct CVEs mentioned across the tweet corpus.
pub fn tweeted_cves(corpus: &Corpus) -> BTreeSet<CveId> {
    corpus
        .tweets
        .iter()
        .flat_map(|t| t.mentioned_cves.iter().cloned())
        .collect()
}
