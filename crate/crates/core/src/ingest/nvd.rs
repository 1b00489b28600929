//! NVD JSON data-feed parser (schema versions 1.0 / 1.1, plain or gzip).

use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::model::{CpeEntry, CveRecord, CvssV2Vector, CvssV3Vector, Reference};

use super::{Diagnostics, IngestError};

#[derive(Deserialize)]
struct Feed {
    #[serde(rename = "CVE_Items")]
    cve_items: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
struct Item {
    cve: Cve,
    #[serde(default)]
    configurations: Option<Configurations>,
    #[serde(default)]
    impact: Option<Impact>,
    #[serde(rename = "publishedDate")]
    published_date: Option<String>,
}

#[derive(Deserialize)]
struct Cve {
    #[serde(rename = "CVE_data_meta")]
    meta: Meta,
    #[serde(default)]
    problemtype: Option<ProblemType>,
    #[serde(default)]
    references: Option<References>,
    #[serde(default)]
    description: Option<Description>,
}

#[derive(Deserialize)]
struct Meta {
    #[serde(rename = "ID")]
    id: String,
}

#[derive(Deserialize)]
struct ProblemType {
    #[serde(default)]
    problemtype_data: Vec<ProblemTypeData>,
}

#[derive(Deserialize)]
struct ProblemTypeData {
    #[serde(default)]
    description: Vec<LangValue>,
}

#[derive(Deserialize)]
struct LangValue {
    #[serde(default)]
    value: String,
}

#[derive(Deserialize)]
struct References {
    #[serde(default)]
    reference_data: Vec<ReferenceData>,
}

#[derive(Deserialize)]
struct ReferenceData {
    url: String,
    #[serde(default)]
    tags: Vec<String>,
}

#[derive(Deserialize)]
struct Description {
    #[serde(default)]
    description_data: Vec<DescriptionData>,
}

#[derive(Deserialize)]
struct DescriptionData {
    #[serde(default)]
    lang: String,
    #[serde(default)]
    value: String,
}

#[derive(Deserialize)]
struct Configurations {
    #[serde(default)]
    nodes: Vec<Node>,
}

#[derive(Deserialize)]
struct Node {
    #[serde(default)]
    cpe_match: Vec<CpeMatch>,
    #[serde(default)]
    children: Vec<Node>,
}

#[derive(Deserialize)]
struct CpeMatch {
    #[serde(rename = "cpe23Uri")]
    cpe23_uri: Option<String>,
    #[serde(rename = "cpe22Uri")]
    cpe22_uri: Option<String>,
}

#[derive(Deserialize)]
struct Impact {
    #[serde(rename = "baseMetricV2")]
    base_metric_v2: Option<BaseMetricV2>,
    #[serde(rename = "baseMetricV3")]
    base_metric_v3: Option<BaseMetricV3>,
}

#[derive(Deserialize)]
struct BaseMetricV2 {
    #[serde(rename = "cvssV2")]
    cvss_v2: CvssData,
    #[serde(rename = "impactScore")]
    impact_score: Option<f64>,
    #[serde(rename = "exploitabilityScore")]
    exploitability_score: Option<f64>,
}

#[derive(Deserialize)]
struct BaseMetricV3 {
    #[serde(rename = "cvssV3")]
    cvss_v3: CvssData,
    #[serde(rename = "impactScore")]
    impact_score: Option<f64>,
    #[serde(rename = "exploitabilityScore")]
    exploitability_score: Option<f64>,
}

#[derive(Deserialize)]
struct CvssData {
    #[serde(rename = "vectorString")]
    vector_string: String,
    #[serde(rename = "baseScore")]
    base_score: f64,
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>, IngestError> {
    let raw = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|source| IngestError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Byte offset of a serde_json (line, column) position within `bytes`.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut seen_lines = 1usize;
    let mut offset = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        if seen_lines == line {
            offset = i;
            break;
        }
        if b == b'\n' {
            seen_lines += 1;
            offset = i + 1;
        }
    }
    offset + column.saturating_sub(1)
}

fn parse_date(raw: &str) -> Option<chrono::NaiveDate> {
    // Feed timestamps look like "2018-01-04T13:29Z"; accept close variants.
    let date_part = raw.split('T').next()?;
    chrono::NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok()
}

fn decompose_cpe(uri: &str) -> Option<CpeEntry> {
    // cpe:2.3:part:vendor:product:...  or  cpe:/part:vendor:product:...
    let fields: Vec<&str> = if let Some(rest) = uri.strip_prefix("cpe:2.3:") {
        rest.split(':').collect()
    } else {
        let rest = uri.strip_prefix("cpe:/")?;
        rest.split(':').collect()
    };
    if fields.len() < 3 {
        return None;
    }
    Some(CpeEntry {
        vendor: fields[1].to_string(),
        product: fields[2].to_string(),
    })
}

fn collect_cpes(node: &Node, out: &mut Vec<CpeEntry>) {
    for m in &node.cpe_match {
        let uri = m.cpe23_uri.as_deref().or(m.cpe22_uri.as_deref());
        if let Some(entry) = uri.and_then(decompose_cpe) {
            out.push(entry);
        }
    }
    for child in &node.children {
        collect_cpes(child, out);
    }
}

fn convert_item(item: Item) -> Result<CveRecord, String> {
    let id = item
        .cve
        .meta
        .id
        .parse()
        .map_err(|e| format!("bad CVE id {:?}: {e}", item.cve.meta.id))?;
    let published_date = item
        .published_date
        .as_deref()
        .and_then(parse_date)
        .ok_or_else(|| "missing or unparseable publishedDate".to_string())?;
    let description = item
        .cve
        .description
        .as_ref()
        .and_then(|d| {
            d.description_data
                .iter()
                .find(|e| e.lang == "en")
                .or_else(|| d.description_data.first())
        })
        .map(|e| e.value.clone())
        .unwrap_or_default();
    let references = item
        .cve
        .references
        .map(|r| {
            r.reference_data
                .into_iter()
                .map(|rd| Reference {
                    url: rd.url,
                    tags: rd.tags.into_iter().collect(),
                })
                .collect()
        })
        .unwrap_or_default();
    let cwe_ids = item
        .cve
        .problemtype
        .map(|p| {
            p.problemtype_data
                .into_iter()
                .flat_map(|d| d.description)
                .map(|lv| lv.value)
                .filter(|v| !v.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let mut cpe_entries = Vec::new();
    if let Some(config) = &item.configurations {
        for node in &config.nodes {
            collect_cpes(node, &mut cpe_entries);
        }
    }
    let (cvss2, cvss3) = match item.impact {
        None => (None, None),
        Some(impact) => {
            let cvss2 = impact
                .base_metric_v2
                .map(|m| {
                    CvssV2Vector::from_vector_string(
                        &m.cvss_v2.vector_string,
                        m.cvss_v2.base_score,
                        m.impact_score.unwrap_or(0.0),
                        m.exploitability_score.unwrap_or(0.0),
                    )
                    .map_err(|e| format!("bad CVSS 2.0 block: {e}"))
                })
                .transpose()?;
            let cvss3 = impact
                .base_metric_v3
                .map(|m| {
                    CvssV3Vector::from_vector_string(
                        &m.cvss_v3.vector_string,
                        m.cvss_v3.base_score,
                        m.impact_score.unwrap_or(0.0),
                        m.exploitability_score.unwrap_or(0.0),
                    )
                    .map_err(|e| format!("bad CVSS 3.x block: {e}"))
                })
                .transpose()?;
            (cvss2, cvss3)
        }
    };
    Ok(CveRecord {
        id,
        published_date,
        description,
        cvss2,
        cvss3,
        references,
        cpe_entries,
        cwe_ids,
    })
}

/// Parse one NVD JSON feed file into CVE records.
///
/// A document that is not valid JSON or lacks the feed structure is a fatal
/// error naming the byte offset. Entries with field anomalies (bad id,
/// missing published date, undecodable CVSS block) are skipped and recorded
/// in the diagnostics.
pub fn parse_nvd_feed(path: &Path) -> Result<(Vec<CveRecord>, Diagnostics), IngestError> {
    let bytes = read_maybe_gzip(path)?;
    let feed: Feed = match serde_json::from_slice(&bytes) {
        Ok(feed) => feed,
        Err(e) => {
            return Err(IngestError::Malformed {
                path: path.to_path_buf(),
                byte_offset: byte_offset(&bytes, e.line(), e.column()),
                message: e.to_string(),
            })
        }
    };
    let mut diag = Diagnostics {
        records_in: feed.cve_items.len(),
        ..Diagnostics::default()
    };
    let mut records = Vec::new();
    for (index, raw_item) in feed.cve_items.into_iter().enumerate() {
        let locator = || format!("entry {index}");
        let item: Item = match serde_json::from_value(raw_item) {
            Ok(item) => item,
            Err(e) => {
                diag.skip(locator(), format!("entry does not match schema: {e}"));
                continue;
            }
        };
        match convert_item(item) {
            Ok(record) => records.push(record),
            Err(reason) => diag.skip(locator(), reason),
        }
    }
    diag.records_out = records.len();
    debug_assert!(diag.is_consistent());
    Ok((records, diag))
}
