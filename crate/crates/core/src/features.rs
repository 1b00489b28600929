//! The 79-dimensional feature vector per CVE and train-only standardization.
//!
//! Column layout:
//!
//! | indices | group         | contents                                   |
//! |---------|---------------|--------------------------------------------|
//! | 0–35    | WORDS         | bag-of-words counts over 36 keywords       |
//! | 36–47   | TWITTER_STATS | tweet/author aggregate statistics          |
//! | 48–56   | CVSS2         | 3 subscores + 6 ordinal-encoded metrics    |
//! | 57–67   | CVSS3         | 3 subscores + 8 ordinal-encoded metrics    |
//! | 68–78   | DATABASE      | 6 counts + 5 binary database indicators    |
//!
//! A CVE with no CVSS vector of a given version gets the missing-value
//! sentinel `-1` in every component of that group.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CveRecord, Dataset, TweetRecord};

/// Total width of the feature vector.
pub const FEATURE_COUNT: usize = 79;
/// Number of bag-of-words keywords (and WORDS columns).
pub const KEYWORD_COUNT: usize = 36;
/// Number of Twitter statistics columns.
pub const TWITTER_STAT_COUNT: usize = 12;
/// Number of CVSS 2.0 columns.
pub const CVSS2_COUNT: usize = 9;
/// Number of CVSS 3.x columns.
pub const CVSS3_COUNT: usize = 11;
/// Number of database columns.
pub const DATABASE_COUNT: usize = 11;
/// Sentinel written to every component of an absent CVSS vector.
pub const MISSING_VALUE: f64 = -1.0;

/// Keywords that must be present in any 36-term list.
pub const REQUIRED_KEYWORDS: [&str; 5] = ["0day", "advisory", "beware", "ssl", "fix"];

const DEFAULT_KEYWORDS: [&str; KEYWORD_COUNT] = [
    "0day",
    "advisory",
    "attack",
    "backdoor",
    "beware",
    "botnet",
    "breach",
    "bypass",
    "ddos",
    "disclosure",
    "dos",
    "escalation",
    "exploit",
    "fix",
    "hack",
    "infosec",
    "injection",
    "leak",
    "malware",
    "overflow",
    "patch",
    "payload",
    "phishing",
    "poc",
    "privilege",
    "ransomware",
    "rce",
    "security",
    "sqli",
    "ssl",
    "trojan",
    "update",
    "vulnerability",
    "worm",
    "xss",
    "zeroday",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("keyword list must have exactly {expected} terms, got {got}")]
    KeywordCount { expected: usize, got: usize },
    #[error("keyword {0:?} is not lowercase alphanumeric")]
    BadKeyword(String),
    #[error("duplicate keyword {0:?}")]
    DuplicateKeyword(String),
    #[error("keyword list is missing required term {0:?}")]
    MissingRequiredKeyword(&'static str),
    #[error("cannot fit a standardizer on an empty matrix")]
    EmptyMatrix,
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedMatrix {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("io error: {0}")]
    Io(String),
}

/// Category of a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureCategory {
    Words,
    TwitterStats,
    Cvss2,
    Cvss3,
    Database,
}

/// Value kind of a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureKind {
    Numeric,
    Ordinal,
    Binary,
}

/// One column of the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub index: usize,
    pub name: String,
    pub category: FeatureCategory,
    pub kind: FeatureKind,
}

/// The 36 lowercase bag-of-words terms, in column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordList {
    terms: Vec<String>,
}

impl KeywordList {
    /// Validate a 36-term list: lowercase alphanumeric, no duplicates, and
    /// all required example terms present.
    pub fn new(terms: Vec<String>) -> Result<Self, FeatureError> {
        if terms.len() != KEYWORD_COUNT {
            return Err(FeatureError::KeywordCount {
                expected: KEYWORD_COUNT,
                got: terms.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for term in &terms {
            if term.is_empty()
                || !term
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
            {
                return Err(FeatureError::BadKeyword(term.clone()));
            }
            if !seen.insert(term.clone()) {
                return Err(FeatureError::DuplicateKeyword(term.clone()));
            }
        }
        for required in REQUIRED_KEYWORDS {
            if !seen.contains(required) {
                return Err(FeatureError::MissingRequiredKeyword(required));
            }
        }
        Ok(KeywordList { terms })
    }

    /// The built-in default list. The five documented example terms are
    /// fixed; the rest are common vulnerability-discussion vocabulary and
    /// can be replaced via [`KeywordList::from_file`].
    pub fn default_terms() -> Self {
        KeywordList::new(DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect())
            .expect("default keyword list is valid")
    }

    /// Load a list from a UTF-8 file with exactly 36 non-empty lines, one
    /// term per line.
    pub fn from_file(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FeatureError::Io(format!("{}: {e}", path.display())))?;
        let terms: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.to_string())
            .collect();
        KeywordList::new(terms)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Default for KeywordList {
    fn default() -> Self {
        Self::default_terms()
    }
}

/// Ordered description of all 79 feature columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    defs: Vec<FeatureDef>,
}

const TWITTER_STAT_NAMES: [&str; TWITTER_STAT_COUNT] = [
    "tweet_count",
    "distinct_user_count",
    "retweet_sum",
    "retweet_max",
    "favorite_sum",
    "favorite_max",
    "followers_sum",
    "followers_max",
    "followers_mean",
    "verified_user_count",
    "hashtag_sum",
    "url_sum",
];

const CVSS2_NAMES: [(&str, FeatureKind); CVSS2_COUNT] = [
    ("cvss2_base_score", FeatureKind::Numeric),
    ("cvss2_impact_subscore", FeatureKind::Numeric),
    ("cvss2_exploitability_subscore", FeatureKind::Numeric),
    ("cvss2_access_vector", FeatureKind::Ordinal),
    ("cvss2_access_complexity", FeatureKind::Ordinal),
    ("cvss2_authentication", FeatureKind::Ordinal),
    ("cvss2_conf_impact", FeatureKind::Ordinal),
    ("cvss2_integ_impact", FeatureKind::Ordinal),
    ("cvss2_avail_impact", FeatureKind::Ordinal),
];

const CVSS3_NAMES: [(&str, FeatureKind); CVSS3_COUNT] = [
    ("cvss3_base_score", FeatureKind::Numeric),
    ("cvss3_impact_subscore", FeatureKind::Numeric),
    ("cvss3_exploitability_subscore", FeatureKind::Numeric),
    ("cvss3_attack_vector", FeatureKind::Ordinal),
    ("cvss3_attack_complexity", FeatureKind::Ordinal),
    ("cvss3_privileges_required", FeatureKind::Ordinal),
    ("cvss3_user_interaction", FeatureKind::Ordinal),
    ("cvss3_scope", FeatureKind::Ordinal),
    ("cvss3_conf_impact", FeatureKind::Ordinal),
    ("cvss3_integ_impact", FeatureKind::Ordinal),
    ("cvss3_avail_impact", FeatureKind::Ordinal),
];

const DATABASE_NAMES: [(&str, FeatureKind); DATABASE_COUNT] = [
    ("reference_count", FeatureKind::Numeric),
    ("cpe_entry_count", FeatureKind::Numeric),
    ("distinct_vendor_count", FeatureKind::Numeric),
    ("distinct_product_count", FeatureKind::Numeric),
    ("cwe_count", FeatureKind::Numeric),
    ("description_token_count", FeatureKind::Numeric),
    ("has_exploit_reference", FeatureKind::Binary),
    ("has_vendor_advisory_reference", FeatureKind::Binary),
    ("has_patch_reference", FeatureKind::Binary),
    ("description_mentions_remote", FeatureKind::Binary),
    ("description_mentions_execute", FeatureKind::Binary),
];

impl FeatureSchema {
    /// Build the schema for a given keyword list. WORDS column names carry
    /// the keyword so exported headers are self-describing.
    pub fn for_keywords(keywords: &KeywordList) -> Self {
        let mut defs = Vec::with_capacity(FEATURE_COUNT);
        for term in keywords.terms() {
            defs.push(FeatureDef {
                index: defs.len(),
                name: format!("bow_{term}"),
                category: FeatureCategory::Words,
                kind: FeatureKind::Numeric,
            });
        }
        for name in TWITTER_STAT_NAMES {
            defs.push(FeatureDef {
                index: defs.len(),
                name: name.to_string(),
                category: FeatureCategory::TwitterStats,
                kind: FeatureKind::Numeric,
            });
        }
        for (name, kind) in CVSS2_NAMES {
            defs.push(FeatureDef {
                index: defs.len(),
                name: name.to_string(),
                category: FeatureCategory::Cvss2,
                kind,
            });
        }
        for (name, kind) in CVSS3_NAMES {
            defs.push(FeatureDef {
                index: defs.len(),
                name: name.to_string(),
                category: FeatureCategory::Cvss3,
                kind,
            });
        }
        for (name, kind) in DATABASE_NAMES {
            defs.push(FeatureDef {
                index: defs.len(),
                name: name.to_string(),
                category: FeatureCategory::Database,
                kind,
            });
        }
        debug_assert_eq!(defs.len(), FEATURE_COUNT);
        FeatureSchema { defs }
    }

    pub fn defs(&self) -> &[FeatureDef] {
        &self.defs
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.defs.iter().map(|d| d.name.as_str()).collect()
    }

    /// Kind of each column, in order (used by synthetic data generators).
    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.defs.iter().map(|d| d.kind).collect()
    }
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self::for_keywords(&KeywordList::default_terms())
    }
}

/// Lowercased alphanumeric tokens of a text; the token boundary used by the
/// bag-of-words counter and the description token count.
pub(crate) fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            for lower in c.to_lowercase() {
                current.push(lower);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Bag-of-words counts: component `i` is the total number of occurrences of
/// keyword `i` across all tweet texts, case-insensitive and token-boundary
/// matched.
pub fn bow_features(tweets_for_cve: &[&TweetRecord], keywords: &KeywordList) -> Vec<f64> {
    let column: BTreeMap<&str, usize> = keywords
        .terms()
        .iter()
        .enumerate()
        .map(|(i, term)| (term.as_str(), i))
        .collect();
    let mut counts = vec![0.0; keywords.len()];
    for tweet in tweets_for_cve {
        for token in tokenize(&tweet.text) {
            if let Some(&i) = column.get(token.as_str()) {
                counts[i] += 1.0;
            }
        }
    }
    counts
}

/// The 12 tweet/author statistics, in schema order.
///
/// Follower statistics aggregate over distinct users: an author tweeting
/// twice counts once, with their largest observed follower count. With no
/// tweets every statistic is 0, including the mean.
pub fn twitter_stats(tweets_for_cve: &[&TweetRecord]) -> Vec<f64> {
    let tweet_count = tweets_for_cve.len() as f64;
    let mut retweet_sum = 0u64;
    let mut retweet_max = 0u64;
    let mut favorite_sum = 0u64;
    let mut favorite_max = 0u64;
    let mut hashtag_sum = 0u64;
    let mut url_sum = 0u64;
    let mut followers_by_user: BTreeMap<&str, u64> = BTreeMap::new();
    let mut verified_users: BTreeSet<&str> = BTreeSet::new();
    for tweet in tweets_for_cve {
        retweet_sum += tweet.retweet_count;
        retweet_max = retweet_max.max(tweet.retweet_count);
        favorite_sum += tweet.favorite_count;
        favorite_max = favorite_max.max(tweet.favorite_count);
        hashtag_sum += tweet.hashtag_count;
        url_sum += tweet.url_count;
        let entry = followers_by_user.entry(&tweet.author_id).or_insert(0);
        *entry = (*entry).max(tweet.author_followers);
        if tweet.author_verified {
            verified_users.insert(&tweet.author_id);
        }
    }
    let distinct_users = followers_by_user.len() as f64;
    let followers_sum: u64 = followers_by_user.values().sum();
    let followers_max: u64 = followers_by_user.values().copied().max().unwrap_or(0);
    let followers_mean = if followers_by_user.is_empty() {
        0.0
    } else {
        followers_sum as f64 / distinct_users
    };
    vec![
        tweet_count,
        distinct_users,
        retweet_sum as f64,
        retweet_max as f64,
        favorite_sum as f64,
        favorite_max as f64,
        followers_sum as f64,
        followers_max as f64,
        followers_mean,
        verified_users.len() as f64,
        hashtag_sum as f64,
        url_sum as f64,
    ]
}

/// The 9 CVSS 2.0 components; all `-1` when the record has no 2.0 vector.
pub fn cvss2_features(record: &CveRecord) -> Vec<f64> {
    match &record.cvss2 {
        None => vec![MISSING_VALUE; CVSS2_COUNT],
        Some(v) => vec![
            v.base_score,
            v.impact_subscore,
            v.exploitability_subscore,
            v.access_vector.ordinal(),
            v.access_complexity.ordinal(),
            v.authentication.ordinal(),
            v.conf_impact.ordinal(),
            v.integ_impact.ordinal(),
            v.avail_impact.ordinal(),
        ],
    }
}

/// The 11 CVSS 3.x components; all `-1` when the record has no 3.x vector.
pub fn cvss3_features(record: &CveRecord) -> Vec<f64> {
    match &record.cvss3 {
        None => vec![MISSING_VALUE; CVSS3_COUNT],
        Some(v) => vec![
            v.base_score,
            v.impact_subscore,
            v.exploitability_subscore,
            v.attack_vector.ordinal(),
            v.attack_complexity.ordinal(),
            v.privileges_required.ordinal(),
            v.user_interaction.ordinal(),
            v.scope.ordinal(),
            v.conf_impact.ordinal(),
            v.integ_impact.ordinal(),
            v.avail_impact.ordinal(),
        ],
    }
}

fn has_tag(record: &CveRecord, tag: &str) -> bool {
    record
        .references
        .iter()
        .any(|r| r.tags.iter().any(|t| t.eq_ignore_ascii_case(tag)))
}

/// The 11 public-database components: 6 counts plus 5 binary indicators.
pub fn db_features(record: &CveRecord) -> Vec<f64> {
    let distinct_vendors: BTreeSet<&str> = record
        .cpe_entries
        .iter()
        .map(|c| c.vendor.as_str())
        .collect();
    let distinct_products: BTreeSet<(&str, &str)> = record
        .cpe_entries
        .iter()
        .map(|c| (c.vendor.as_str(), c.product.as_str()))
        .collect();
    let description_lower = record.description.to_lowercase();
    vec![
        record.references.len() as f64,
        record.cpe_entries.len() as f64,
        distinct_vendors.len() as f64,
        distinct_products.len() as f64,
        record.cwe_ids.len() as f64,
        tokenize(&record.description).len() as f64,
        f64::from(has_tag(record, "exploit")),
        f64::from(has_tag(record, "vendor advisory")),
        f64::from(has_tag(record, "patch")),
        f64::from(description_lower.contains("remote")),
        f64::from(description_lower.contains("execute")),
    ]
}

/// Full 79-component row for one CVE, in schema order.
pub fn feature_row(
    record: &CveRecord,
    tweets_for_cve: &[&TweetRecord],
    keywords: &KeywordList,
) -> Vec<f64> {
    let mut row = Vec::with_capacity(FEATURE_COUNT);
    row.extend(bow_features(tweets_for_cve, keywords));
    row.extend(twitter_stats(tweets_for_cve));
    row.extend(cvss2_features(record));
    row.extend(cvss3_features(record));
    row.extend(db_features(record));
    debug_assert_eq!(row.len(), FEATURE_COUNT);
    row
}

/// Feature matrix plus the RW and PoC label vectors, rows in dataset order.
pub type LabeledMatrix = (Vec<Vec<f64>>, Vec<bool>, Vec<bool>);

/// Feature matrix plus both label vectors, rows in dataset order.
pub fn build_matrix(dataset: &Dataset) -> Result<LabeledMatrix, FeatureError> {
    let expected = dataset.schema().len();
    let mut x = Vec::with_capacity(dataset.len());
    let mut y_rw = Vec::with_capacity(dataset.len());
    let mut y_poc = Vec::with_capacity(dataset.len());
    for (row, inst) in dataset.instances().iter().enumerate() {
        if inst.features.len() != expected {
            return Err(FeatureError::RaggedMatrix {
                row,
                got: inst.features.len(),
                expected,
            });
        }
        x.push(inst.features.clone());
        y_rw.push(inst.label_rw);
        y_poc.push(inst.label_poc);
    }
    Ok((x, y_rw, y_poc))
}

/// Per-column mean and population standard deviation, fitted on training
/// rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

impl Standardizer {
    /// Transform rows to zero mean, unit variance; columns with zero
    /// standard deviation divide by 1 instead.
    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|row| {
                row.iter()
                    .zip(self.means.iter().zip(&self.stddevs))
                    .map(|(v, (mean, std))| {
                        let divisor = if *std == 0.0 { 1.0 } else { *std };
                        (v - mean) / divisor
                    })
                    .collect()
            })
            .collect()
    }
}

/// Fit per-column means and population standard deviations.
pub fn fit_standardizer(x_train: &[Vec<f64>]) -> Result<Standardizer, FeatureError> {
    let Some(first) = x_train.first() else {
        return Err(FeatureError::EmptyMatrix);
    };
    let cols = first.len();
    for (row, r) in x_train.iter().enumerate() {
        if r.len() != cols {
            return Err(FeatureError::RaggedMatrix {
                row,
                got: r.len(),
                expected: cols,
            });
        }
    }
    let n = x_train.len() as f64;
    let mut means = vec![0.0; cols];
    for row in x_train {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; cols];
    for row in x_train {
        for ((var, v), mean) in vars.iter_mut().zip(row).zip(&means) {
            let d = v - mean;
            *var += d * d;
        }
    }
    let stddevs = vars.iter().map(|v| (v / n).sqrt()).collect();
    Ok(Standardizer { means, stddevs })
}

/// Apply a fitted standardizer to a matrix.
pub fn apply_standardizer(s: &Standardizer, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    s.transform(x)
}

/// Export the dataset's feature matrix as CSV: a header of schema names,
/// one row per instance, and the two label columns last.
pub fn write_matrix_csv<W: Write>(writer: W, dataset: &Dataset) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = vec!["cve_id".to_string()];
    header.extend(dataset.schema().names().iter().map(|s| s.to_string()));
    header.push("label_rw".to_string());
    header.push("label_poc".to_string());
    w.write_record(&header)
        .map_err(|e| FeatureError::Io(e.to_string()))?;
    for inst in dataset.instances() {
        let mut row: Vec<String> = vec![inst.cve_id.to_string()];
        row.extend(inst.features.iter().map(|v| format_value(*v)));
        row.push((inst.label_rw as u8).to_string());
        row.push((inst.label_poc as u8).to_string());
        w.write_record(&row)
            .map_err(|e| FeatureError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| FeatureError::Io(e.to_string()))?;
    Ok(())
}

fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CpeEntry, CveId, CveRecord, Instance, Reference};
    use chrono::{NaiveDate, TimeZone, Utc};

    fn tweet(id: &str, author: &str, text: &str, followers: u64) -> TweetRecord {
        TweetRecord::new(
            id.into(),
            author.into(),
            Utc.with_ymd_and_hms(2018, 3, 1, 12, 0, 0).unwrap(),
            text.into(),
            0,
            0,
            followers,
            0,
            false,
            0,
            0,
        )
    }

    fn bare_record(id: &str) -> CveRecord {
        CveRecord {
            id: id.parse().unwrap(),
            published_date: NaiveDate::from_ymd_opt(2018, 1, 10).unwrap(),
            description: String::new(),
            cvss2: None,
            cvss3: None,
            references: Vec::new(),
            cpe_entries: Vec::new(),
            cwe_ids: Vec::new(),
        }
    }

    #[test]
    fn schema_layout_matches_declared_ranges() {
        let schema = FeatureSchema::default();
        assert_eq!(schema.len(), FEATURE_COUNT);
        let defs = schema.defs();
        for d in &defs[0..36] {
            assert_eq!(d.category, FeatureCategory::Words);
        }
        for d in &defs[36..48] {
            assert_eq!(d.category, FeatureCategory::TwitterStats);
        }
        for d in &defs[48..57] {
            assert_eq!(d.category, FeatureCategory::Cvss2);
        }
        for d in &defs[57..68] {
            assert_eq!(d.category, FeatureCategory::Cvss3);
        }
        for d in &defs[68..79] {
            assert_eq!(d.category, FeatureCategory::Database);
        }
        assert_eq!(
            defs.iter()
                .filter(|d| d.kind == FeatureKind::Binary)
                .count(),
            5
        );
        assert_eq!(
            defs.iter()
                .filter(|d| d.kind == FeatureKind::Ordinal)
                .count(),
            6 + 8
        );
        // Indices are their positions.
        for (i, d) in defs.iter().enumerate() {
            assert_eq!(d.index, i);
        }
    }

    #[test]
    fn default_keywords_contain_required_terms() {
        let kw = KeywordList::default_terms();
        assert_eq!(kw.len(), KEYWORD_COUNT);
        for required in REQUIRED_KEYWORDS {
            assert!(kw.terms().iter().any(|t| t == required), "{required}");
        }
    }

    #[test]
    fn keyword_list_rejects_wrong_count_and_case() {
        assert!(matches!(
            KeywordList::new(vec!["0day".into()]),
            Err(FeatureError::KeywordCount { got: 1, .. })
        ));
        let mut terms: Vec<String> = KeywordList::default_terms().terms().to_vec();
        terms[2] = "Attack".into();
        assert!(matches!(
            KeywordList::new(terms),
            Err(FeatureError::BadKeyword(_))
        ));
    }

    #[test]
    fn bow_counts_keyword_occurrences() {
        let kw = KeywordList::default_terms();
        let t = tweet("1", "u", "new 0day fix available", 10);
        let row = bow_features(&[&t], &kw);
        let idx_0day = kw.terms().iter().position(|t| t == "0day").unwrap();
        let idx_fix = kw.terms().iter().position(|t| t == "fix").unwrap();
        for (i, v) in row.iter().enumerate() {
            let expected = if i == idx_0day || i == idx_fix {
                1.0
            } else {
                0.0
            };
            assert_eq!(*v, expected, "column {i}");
        }
    }

    #[test]
    fn bow_requires_token_boundaries() {
        let kw = KeywordList::default_terms();
        let t = tweet("1", "u", "openssl is not plain ssl, ssl!", 10);
        let row = bow_features(&[&t], &kw);
        let idx_ssl = kw.terms().iter().position(|t| t == "ssl").unwrap();
        assert_eq!(row[idx_ssl], 2.0);
    }

    #[test]
    fn bow_of_no_tweets_is_zero() {
        let kw = KeywordList::default_terms();
        assert!(bow_features(&[], &kw).iter().all(|v| *v == 0.0));
    }

    // Independent oracle: regex word-boundary scan per keyword.
    #[test]
    fn bow_matches_regex_scan_oracle() {
        use rand::{Rng, SeedableRng};
        let kw = KeywordList::default_terms();
        let vocab = [
            "0day", "fix", "ssl", "openssl", "the", "exploit", "EXPLOIT", "patch2", "patch",
            "beware", "ssl2", "un-fix", "advisory",
        ];
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let tweets: Vec<TweetRecord> = (0..50)
            .map(|i| {
                let words: Vec<&str> = (0..rng.random_range(1..12))
                    .map(|_| vocab[rng.random_range(0..vocab.len())])
                    .collect();
                tweet(&i.to_string(), "u", &words.join(" "), 1)
            })
            .collect();
        let refs: Vec<&TweetRecord> = tweets.iter().collect();
        let row = bow_features(&refs, &kw);
        for (i, term) in kw.terms().iter().enumerate() {
            let pattern = regex::Regex::new(&format!(
                r"(?i)(^|[^a-z0-9]){}($|[^a-z0-9])",
                regex::escape(term)
            ))
            .unwrap();
            let mut count = 0usize;
            for t in &tweets {
                // Overlap-safe scan: advance one char at a time.
                let text = &t.text;
                let mut start = 0;
                while let Some(m) = pattern.find_at(text, start) {
                    count += 1;
                    // Step past the keyword, not the trailing boundary char.
                    let inner = m.as_str().to_lowercase();
                    let offset = inner.find(term.as_str()).unwrap();
                    start = m.start() + offset + term.len();
                }
            }
            assert_eq!(row[i], count as f64, "keyword {term}");
        }
    }

    #[test]
    fn twitter_stats_aggregate_per_distinct_user() {
        let mut a = tweet("1", "alice", "x", 100);
        a.retweet_count = 3;
        let mut b = tweet("2", "alice", "y", 100);
        b.retweet_count = 5;
        let stats = twitter_stats(&[&a, &b]);
        assert_eq!(stats[0], 2.0); // tweet_count
        assert_eq!(stats[1], 1.0); // distinct users
        assert_eq!(stats[2], 8.0); // retweet_sum
        assert_eq!(stats[3], 5.0); // retweet_max
        assert_eq!(stats[6], 100.0); // followers_sum over distinct users
        assert_eq!(stats[8], 100.0); // followers_mean
    }

    #[test]
    fn twitter_stats_of_no_tweets_are_zero() {
        let stats = twitter_stats(&[]);
        assert_eq!(stats, vec![0.0; TWITTER_STAT_COUNT]);
    }

    // Independent oracle: re-aggregate with a different, naive pass.
    #[test]
    fn twitter_stats_match_brute_force_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        let users = ["u0", "u1", "u2", "u3", "u4", "u5", "u6"];
        let tweets: Vec<TweetRecord> = (0..30)
            .map(|i| {
                let mut t = tweet(
                    &i.to_string(),
                    users[rng.random_range(0..users.len())],
                    "body",
                    rng.random_range(0..5000),
                );
                t.retweet_count = rng.random_range(0..40);
                t.favorite_count = rng.random_range(0..40);
                t.author_verified = rng.random_bool(0.3);
                t.hashtag_count = rng.random_range(0..4);
                t.url_count = rng.random_range(0..3);
                t
            })
            .collect();
        let refs: Vec<&TweetRecord> = tweets.iter().collect();
        let stats = twitter_stats(&refs);

        let mut user_followers: BTreeMap<String, u64> = BTreeMap::new();
        let mut verified: BTreeSet<String> = BTreeSet::new();
        for t in &tweets {
            let best = user_followers.entry(t.author_id.clone()).or_insert(0);
            if t.author_followers > *best {
                *best = t.author_followers;
            }
            if t.author_verified {
                verified.insert(t.author_id.clone());
            }
        }
        let expect_sum: u64 = user_followers.values().sum();
        assert_eq!(stats[0], tweets.len() as f64);
        assert_eq!(stats[1], user_followers.len() as f64);
        assert_eq!(
            stats[2],
            tweets.iter().map(|t| t.retweet_count).sum::<u64>() as f64
        );
        assert_eq!(
            stats[3],
            tweets.iter().map(|t| t.retweet_count).max().unwrap() as f64
        );
        assert_eq!(
            stats[4],
            tweets.iter().map(|t| t.favorite_count).sum::<u64>() as f64
        );
        assert_eq!(
            stats[5],
            tweets.iter().map(|t| t.favorite_count).max().unwrap() as f64
        );
        assert_eq!(stats[6], expect_sum as f64);
        assert_eq!(stats[7], *user_followers.values().max().unwrap() as f64);
        assert!((stats[8] - expect_sum as f64 / user_followers.len() as f64).abs() < 1e-12);
        assert_eq!(stats[9], verified.len() as f64);
        assert_eq!(
            stats[10],
            tweets.iter().map(|t| t.hashtag_count).sum::<u64>() as f64
        );
        assert_eq!(
            stats[11],
            tweets.iter().map(|t| t.url_count).sum::<u64>() as f64
        );
    }

    #[test]
    fn cvss_features_encode_declared_order() {
        use crate::model::CvssV2Vector;
        let mut record = bare_record("CVE-2018-1111");
        record.cvss2 = Some(
            CvssV2Vector::from_vector_string("AV:N/AC:L/Au:N/C:P/I:P/A:P", 7.5, 6.4, 10.0).unwrap(),
        );
        let row = cvss2_features(&record);
        assert_eq!(row, vec![7.5, 6.4, 10.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn absent_cvss_yields_sentinels() {
        let record = bare_record("CVE-2018-1111");
        assert_eq!(cvss2_features(&record), vec![MISSING_VALUE; CVSS2_COUNT]);
        assert_eq!(cvss3_features(&record), vec![MISSING_VALUE; CVSS3_COUNT]);
        let row = feature_row(&record, &[], &KeywordList::default_terms());
        let sentinels = row[48..68].iter().filter(|v| **v == MISSING_VALUE).count();
        assert_eq!(sentinels, 20);
    }

    #[test]
    fn db_features_cover_counts_and_flags() {
        let mut record = bare_record("CVE-2018-2222");
        record.description = "Allows remote attackers to execute arbitrary code".into();
        record.references = vec![
            Reference {
                url: "https://a".into(),
                tags: ["Patch".to_string()].into(),
            },
            Reference {
                url: "https://b".into(),
                tags: BTreeSet::new(),
            },
            Reference {
                url: "https://c".into(),
                tags: BTreeSet::new(),
            },
        ];
        record.cpe_entries = vec![
            CpeEntry {
                vendor: "acme".into(),
                product: "widget".into(),
            },
            CpeEntry {
                vendor: "acme".into(),
                product: "gadget".into(),
            },
        ];
        let row = db_features(&record);
        assert_eq!(row[0], 3.0); // references
        assert_eq!(row[1], 2.0); // cpe entries
        assert_eq!(row[2], 1.0); // distinct vendors
        assert_eq!(row[3], 2.0); // distinct products
        assert_eq!(row[4], 0.0); // cwe
        assert_eq!(row[5], 7.0); // description tokens
        assert_eq!(row[6], 0.0); // exploit tag
        assert_eq!(row[8], 1.0); // patch tag
        assert_eq!(row[9], 1.0); // "remote"
        assert_eq!(row[10], 1.0); // "execute"
    }

    #[test]
    fn db_features_of_empty_description() {
        let record = bare_record("CVE-2018-3333");
        let row = db_features(&record);
        assert_eq!(row[5], 0.0);
        assert_eq!(row[9], 0.0);
        assert_eq!(row[10], 0.0);
    }

    #[test]
    fn standardizer_zeroes_constant_columns() {
        let x = vec![vec![5.0, 1.0], vec![5.0, 3.0]];
        let s = fit_standardizer(&x).unwrap();
        let t = s.transform(&x);
        assert_eq!(t[0][0], 0.0);
        assert_eq!(t[1][0], 0.0);
        // Column {1, 3}: mean 2, population stddev 1.
        assert_eq!(t[0][1], -1.0);
        assert_eq!(t[1][1], 1.0);
    }

    #[test]
    fn standardizer_uses_population_stddev() {
        let x = vec![vec![0.0], vec![2.0]];
        let s = fit_standardizer(&x).unwrap();
        assert_eq!(s.means[0], 1.0);
        assert_eq!(s.stddevs[0], 1.0);
        let t = s.transform(&x);
        assert_eq!(t[0][0], -1.0);
        assert_eq!(t[1][0], 1.0);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_variance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..6).map(|_| rng.random_range(-50.0..50.0)).collect())
            .collect();
        let s = fit_standardizer(&x).unwrap();
        let t = s.transform(&x);
        for col in 0..6 {
            let n = t.len() as f64;
            let mean: f64 = t.iter().map(|r| r[col]).sum::<f64>() / n;
            let var: f64 = t.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "col {col} mean {mean}");
            assert!((var - 1.0).abs() < 1e-9, "col {col} var {var}");
        }
    }

    #[test]
    fn fit_on_empty_matrix_fails() {
        assert_eq!(fit_standardizer(&[]), Err(FeatureError::EmptyMatrix));
    }

    #[test]
    fn matrix_row_per_instance() {
        let schema = FeatureSchema::default();
        let id: CveId = "CVE-2018-0001".parse().unwrap();
        let inst = Instance::new(id, vec![0.0; FEATURE_COUNT], true, false);
        let ds = Dataset::new(schema, vec![inst]).unwrap();
        let (x, y_rw, y_poc) = build_matrix(&ds).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x[0].len(), FEATURE_COUNT);
        assert_eq!(y_rw, vec![true]);
        assert_eq!(y_poc, vec![false]);
    }

    #[test]
    fn matrix_csv_has_schema_header_and_label_columns() {
        let schema = FeatureSchema::default();
        let id: CveId = "CVE-2018-0001".parse().unwrap();
        let inst = Instance::new(id, vec![0.5; FEATURE_COUNT], true, false);
        let ds = Dataset::new(schema, vec![inst]).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &ds).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("cve_id,bow_0day,"));
        assert!(header.ends_with("label_rw,label_poc"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("CVE-2018-0001,0.5,"));
        assert!(row.ends_with(",1,0"));
    }
}
