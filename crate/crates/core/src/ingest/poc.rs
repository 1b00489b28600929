//! PoC exploit-listing parser: the exploit-archive CSV index joined with an
//! external (edb_id, cve_id) mapping file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;

use crate::model::CveId;

use super::{Diagnostics, IngestError, PocEntry};

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>, IngestError> {
    if !path.is_file() {
        return Err(IngestError::MissingFile(path.to_path_buf()));
    }
    csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::BadInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

fn column_index(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

/// Load the (edb_id -> CVE set) mapping. A missing file is fatal; rows with
/// unparseable CVE ids are reported through `notes`.
fn load_cve_map(
    path: &Path,
    notes: &mut Vec<String>,
) -> Result<BTreeMap<String, BTreeSet<CveId>>, IngestError> {
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| IngestError::BadInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    let id_col =
        column_index(&headers, &["edb_id", "id"]).ok_or_else(|| IngestError::BadInput {
            path: path.to_path_buf(),
            message: "map file needs an edb_id column".to_string(),
        })?;
    let cve_col =
        column_index(&headers, &["cve_id", "cve"]).ok_or_else(|| IngestError::BadInput {
            path: path.to_path_buf(),
            message: "map file needs a cve_id column".to_string(),
        })?;
    let mut map: BTreeMap<String, BTreeSet<CveId>> = BTreeMap::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row.map_err(|e| IngestError::BadInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let (Some(edb_id), Some(cve_text)) = (row.get(id_col), row.get(cve_col)) else {
            notes.push(format!("map row {}: too few columns", row_index + 2));
            continue;
        };
        match cve_text.trim().parse::<CveId>() {
            Ok(cve) => {
                map.entry(edb_id.trim().to_string())
                    .or_default()
                    .insert(cve);
            }
            Err(e) => notes.push(format!("map row {}: {e}", row_index + 2)),
        }
    }
    Ok(map)
}

/// Load the exploit listing and join it with the CVE map. Listed exploits
/// with no mapped CVE are dropped with a diagnostic.
pub fn load_poc_listing(
    listing_path: &Path,
    cve_map_path: &Path,
) -> Result<(Vec<PocEntry>, Diagnostics), IngestError> {
    let mut diag = Diagnostics::default();
    let map = load_cve_map(cve_map_path, &mut diag.notes)?;
    let mut reader = open_csv(listing_path)?;
    let headers = reader
        .headers()
        .map_err(|e| IngestError::BadInput {
            path: listing_path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    let id_col =
        column_index(&headers, &["id", "edb_id"]).ok_or_else(|| IngestError::BadInput {
            path: listing_path.to_path_buf(),
            message: "listing needs an id column".to_string(),
        })?;
    let date_col = column_index(&headers, &["date", "date_published"]);

    let mut entries = Vec::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row.map_err(|e| IngestError::BadInput {
            path: listing_path.to_path_buf(),
            message: e.to_string(),
        })?;
        diag.records_in += 1;
        let locator = format!("row {}", row_index + 2);
        let Some(edb_id) = row.get(id_col).map(|s| s.trim().to_string()) else {
            diag.skip(locator, "missing id column value");
            continue;
        };
        let Some(cve_ids) = map.get(&edb_id).cloned() else {
            diag.skip(locator, format!("edb_id {edb_id} has no CVE mapping"));
            continue;
        };
        let published_date = date_col
            .and_then(|c| row.get(c))
            .and_then(|raw| NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").ok());
        entries.push(PocEntry {
            edb_id,
            cve_ids,
            published_date,
        });
    }
    diag.records_out = entries.len();
    debug_assert!(diag.is_consistent());
    Ok((entries, diag))
}
