//! CVE identifiers and their extraction from free text.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CveIdError {
    #[error("CVE year {0} outside the accepted range 1999..=2100")]
    YearOutOfRange(u16),
    #[error("CVE sequence {0:?} must be 4 to 7 ASCII digits")]
    BadSequence(String),
    #[error("not a canonical CVE identifier: {0:?}")]
    BadFormat(String),
}

/// One CVE number, e.g. `CVE-2017-5754`.
///
/// The sequence part is kept as text so identifiers with leading zeros
/// (`CVE-2017-0144`) survive round-trips unchanged. Ordering is by year,
/// then by numeric sequence value, then by sequence text, which makes
/// sorted collections of ids deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CveId {
    year: u16,
    sequence: String,
}

impl CveId {
    pub fn new(year: u16, sequence: &str) -> Result<Self, CveIdError> {
        if !(1999..=2100).contains(&year) {
            return Err(CveIdError::YearOutOfRange(year));
        }
        let len = sequence.len();
        if !(4..=7).contains(&len) || !sequence.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CveIdError::BadSequence(sequence.to_string()));
        }
        Ok(CveId {
            year,
            sequence: sequence.to_string(),
        })
    }

    /// Disclosure year encoded in the identifier.
    pub fn year(&self) -> u16 {
        self.year
    }

    pub fn sequence(&self) -> &str {
        &self.sequence
    }

    fn sequence_value(&self) -> u32 {
        // 4..=7 digits always fit in u32.
        self.sequence.parse().expect("validated digits")
    }
}

impl fmt::Display for CveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CVE-{}-{}", self.year, self.sequence)
    }
}

impl FromStr for CveId {
    type Err = CveIdError;

    fn from_str(s: &str) -> Result<Self, CveIdError> {
        let rest = s
            .strip_prefix("CVE-")
            .or_else(|| {
                if s.len() >= 4 && s[..4].eq_ignore_ascii_case("cve-") {
                    Some(&s[4..])
                } else {
                    None
                }
            })
            .ok_or_else(|| CveIdError::BadFormat(s.to_string()))?;
        let (year, seq) = rest
            .split_once('-')
            .ok_or_else(|| CveIdError::BadFormat(s.to_string()))?;
        if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CveIdError::BadFormat(s.to_string()));
        }
        let year: u16 = year
            .parse()
            .map_err(|_| CveIdError::BadFormat(s.to_string()))?;
        CveId::new(year, seq)
    }
}

impl Ord for CveId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.year
            .cmp(&other.year)
            .then_with(|| self.sequence_value().cmp(&other.sequence_value()))
            .then_with(|| self.sequence.cmp(&other.sequence))
    }
}

impl PartialOrd for CveId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for CveId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CveId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

fn cve_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"(?i)CVE-(\d{4})-(\d{4,7})").expect("valid pattern"))
}

/// Extract every CVE number mentioned in `text`.
///
/// Matches `CVE-<4 digits>-<4..7 digits>` case-insensitively anywhere in the
/// text, normalizes to the uppercase canonical form, and collapses
/// duplicates. Matches whose year falls outside the representable range are
/// dropped.
pub fn extract_cve_ids(text: &str) -> BTreeSet<CveId> {
    let mut out = BTreeSet::new();
    for caps in cve_pattern().captures_iter(text) {
        let year: u16 = match caps[1].parse() {
            Ok(y) => y,
            Err(_) => continue,
        };
        if let Ok(id) = CveId::new(year, &caps[2]) {
            out.insert(id);
        }
    }
    out
}
