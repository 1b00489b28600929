//! File-based parsers for the four raw data sources: NVD JSON feeds, tweet
//! dumps, vendor signature pages, and PoC exploit listings.
//!
//! Every parser works from pre-fetched local files, is deterministic over
//! its input bytes, and is total over a corpus: each input record either
//! becomes an output record or a skip entry in the returned
//! [`Diagnostics`], never silently vanishes. Document-level problems
//! (unreadable file, malformed feed) are fatal errors.

mod nvd;
mod poc;
mod tweets;
mod vendor;

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::CveId;

pub use nvd::parse_nvd_feed;
pub use poc::load_poc_listing;
pub use tweets::load_tweets;
pub use vendor::parse_vendor_signatures;

/// Antivirus / IPS vendors with public signature descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Vendor {
    SymantecAv,
    SymantecIps,
    Avast,
    Eset,
    TrendMicro,
    Kaspersky,
}

impl Vendor {
    pub const ALL: [Vendor; 6] = [
        Vendor::SymantecAv,
        Vendor::SymantecIps,
        Vendor::Avast,
        Vendor::Eset,
        Vendor::TrendMicro,
        Vendor::Kaspersky,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Vendor::SymantecAv => "SYMANTEC_AV",
            Vendor::SymantecIps => "SYMANTEC_IPS",
            Vendor::Avast => "AVAST",
            Vendor::Eset => "ESET",
            Vendor::TrendMicro => "TRENDMICRO",
            Vendor::Kaspersky => "KASPERSKY",
        }
    }
}

impl fmt::Display for Vendor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Vendor {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, IngestError> {
        Vendor::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| IngestError::UnknownVendor(s.to_string()))
    }
}

/// One signature page entry from a vendor's public threat encyclopedia.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VendorSignatureEntry {
    pub vendor: Vendor,
    pub signature_id: String,
    pub description: String,
    /// CVE numbers extracted from the page text.
    pub mentioned_cves: BTreeSet<CveId>,
    pub published_date: Option<NaiveDate>,
}

/// One proof-of-concept exploit entry joined with its CVE mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocEntry {
    pub edb_id: String,
    /// Nonempty: unmapped listing rows are dropped with a diagnostic.
    pub cve_ids: BTreeSet<CveId>,
    pub published_date: Option<NaiveDate>,
}

/// One skipped input record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    /// Where the record came from: a line number, entry index, or file name.
    pub locator: String,
    pub reason: String,
}

/// Per-parse bookkeeping: `records_in == records_out + skipped.len()` always
/// holds for a completed parse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub records_in: usize,
    pub records_out: usize,
    pub skipped: Vec<Skip>,
    /// Side observations that do not correspond to an input record (for
    /// example anomalies in an auxiliary mapping file).
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn skip(&mut self, locator: impl Into<String>, reason: impl Into<String>) {
        self.skipped.push(Skip {
            locator: locator.into(),
            reason: reason.into(),
        });
    }

    /// Totality check: every input record is either out or skipped.
    pub fn is_consistent(&self) -> bool {
        self.records_in == self.records_out + self.skipped.len()
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed document at byte offset {byte_offset}: {message}")]
    Malformed {
        path: PathBuf,
        byte_offset: usize,
        message: String,
    },
    #[error("missing required file {0}")]
    MissingFile(PathBuf),
    #[error("unknown vendor {0:?}")]
    UnknownVendor(String),
    #[error("{path}: {message}")]
    BadInput { path: PathBuf, message: String },
}
