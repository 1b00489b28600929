//! CVE records, learning instances, and dataset assembly.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{feature_row, FeatureSchema, KeywordList, FEATURE_COUNT};
use crate::groundtruth::LabelSet;

use super::cve::CveId;
use super::cvss::{CvssV2Vector, CvssV3Vector};
use super::tweet::TweetRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("instance for {id} has {got} features, schema expects {expected}")]
    DimensionMismatch {
        id: CveId,
        got: usize,
        expected: usize,
    },
    #[error("duplicate instance for {0}")]
    DuplicateInstance(CveId),
    #[error("instance year {year} does not match {id}")]
    YearMismatch { id: CveId, year: u16 },
}

/// One reference attached to a CVE record, with the feed's tags verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub url: String,
    pub tags: BTreeSet<String>,
}

/// One affected-platform entry decomposed from a CPE URI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpeEntry {
    pub vendor: String,
    pub product: String,
}

/// One disclosed vulnerability as ingested from the public database feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CveRecord {
    pub id: CveId,
    pub published_date: NaiveDate,
    pub description: String,
    pub cvss2: Option<CvssV2Vector>,
    pub cvss3: Option<CvssV3Vector>,
    pub references: Vec<Reference>,
    pub cpe_entries: Vec<CpeEntry>,
    pub cwe_ids: Vec<String>,
}

/// One per-CVE learning instance: the feature vector plus both label columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub cve_id: CveId,
    pub features: Vec<f64>,
    pub label_rw: bool,
    pub label_poc: bool,
    pub year: u16,
}

impl Instance {
    pub fn new(cve_id: CveId, features: Vec<f64>, label_rw: bool, label_poc: bool) -> Self {
        let year = cve_id.year();
        Instance {
            cve_id,
            features,
            label_rw,
            label_poc,
            year,
        }
    }
}

/// An ordered collection of instances conforming to one feature schema.
///
/// Instances are kept sorted by CVE id, so the row order of any matrix
/// built from the dataset is deterministic for a fixed input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Validate and sort the instances. Rejects duplicate CVE ids, feature
    /// vectors that do not match the schema width, and year fields that
    /// disagree with the id.
    pub fn new(schema: FeatureSchema, mut instances: Vec<Instance>) -> Result<Self, ModelError> {
        let expected = schema.len();
        for inst in &instances {
            if inst.features.len() != expected {
                return Err(ModelError::DimensionMismatch {
                    id: inst.cve_id.clone(),
                    got: inst.features.len(),
                    expected,
                });
            }
            if inst.year != inst.cve_id.year() {
                return Err(ModelError::YearMismatch {
                    id: inst.cve_id.clone(),
                    year: inst.year,
                });
            }
        }
        instances.sort_by(|a, b| a.cve_id.cmp(&b.cve_id));
        for pair in instances.windows(2) {
            if pair[0].cve_id == pair[1].cve_id {
                return Err(ModelError::DuplicateInstance(pair[0].cve_id.clone()));
            }
        }
        Ok(Dataset { schema, instances })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Instances restricted to one disclosure year.
    pub fn instances_for_year(&self, year: u16) -> Vec<&Instance> {
        self.instances.iter().filter(|i| i.year == year).collect()
    }
}

/// Join bookkeeping emitted by [`assemble_dataset`]. Lossy joins between the
/// sources are expected; the counts make them visible instead of fatal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyDiagnostics {
    /// Tweets inspected.
    pub tweets_seen: usize,
    /// Distinct CVEs mentioned across all tweets.
    pub mentioned_cves: usize,
    /// Distinct mentioned CVEs dropped because their year is outside the
    /// requested range.
    pub out_of_range_cves: usize,
    /// Mentioned, in-range CVEs with no record in the database feed; each is
    /// skipped rather than failing assembly.
    pub missing_record_cves: BTreeSet<CveId>,
    /// Duplicate record ids encountered (first occurrence wins).
    pub duplicate_record_ids: usize,
    /// Instances produced.
    pub instances_built: usize,
}

/// Build one instance per CVE that falls inside `year_range` and is
/// mentioned by at least one tweet.
///
/// Mentions of CVEs outside the year range are dropped. A tweeted, in-range
/// CVE without a database record is skipped and counted in the diagnostics.
/// Labels absent from `labels` default to false. Output order is sorted by
/// CVE id.
pub fn assemble_dataset(
    records: &[CveRecord],
    tweets: &[TweetRecord],
    labels: &LabelSet,
    year_range: RangeInclusive<u16>,
    keywords: &KeywordList,
) -> (Dataset, AssemblyDiagnostics) {
    let mut diag = AssemblyDiagnostics {
        tweets_seen: tweets.len(),
        ..AssemblyDiagnostics::default()
    };

    // First occurrence wins on duplicate record ids.
    let mut by_id: BTreeMap<&CveId, &CveRecord> = BTreeMap::new();
    for record in records {
        if by_id.contains_key(&record.id) {
            diag.duplicate_record_ids += 1;
        } else {
            by_id.insert(&record.id, record);
        }
    }

    let mut tweets_by_cve: BTreeMap<CveId, Vec<&TweetRecord>> = BTreeMap::new();
    for tweet in tweets {
        for id in &tweet.mentioned_cves {
            tweets_by_cve.entry(id.clone()).or_default().push(tweet);
        }
    }
    diag.mentioned_cves = tweets_by_cve.len();

    let mut instances = Vec::new();
    for (id, cve_tweets) in &tweets_by_cve {
        let record = match by_id.get(id) {
            Some(r) => *r,
            None => {
                if year_range.contains(&id.year()) {
                    diag.missing_record_cves.insert(id.clone());
                } else {
                    diag.out_of_range_cves += 1;
                }
                continue;
            }
        };
        let published_year = record.published_date.year();
        let in_range = u16::try_from(published_year)
            .map(|y| year_range.contains(&y))
            .unwrap_or(false);
        if !in_range {
            diag.out_of_range_cves += 1;
            continue;
        }
        let features = feature_row(record, cve_tweets, keywords);
        let (rw, poc) = labels
            .get(id)
            .map(|entry| (entry.rw, entry.poc))
            .unwrap_or((false, false));
        instances.push(Instance::new(id.clone(), features, rw, poc));
    }
    diag.instances_built = instances.len();

    let schema = FeatureSchema::for_keywords(keywords);
    debug_assert_eq!(schema.len(), FEATURE_COUNT);
    let dataset = Dataset::new(schema, instances)
        .expect("assembled instances satisfy schema by construction");
    (dataset, diag)
}
