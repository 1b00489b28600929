//! Vendor signature-page parser.
//!
//! Input is a directory (or single file) of pre-fetched HTML or plain-text
//! pages from a vendor's public signature / threat encyclopedia. Each page
//! yields one entry, unless it contains explicit `Signature:` marker lines,
//! in which case each marked block is its own entry. CVE mentions are
//! extracted from all text on the page, including the title.

use std::path::Path;
use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;

use crate::model::extract_cve_ids;

use super::{Diagnostics, IngestError, Vendor, VendorSignatureEntry};

fn marker_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"(?im)^\s*signature(?:\s+id)?\s*[:#]\s*(\S.*?)\s*$").expect("valid pattern")
    })
}

fn date_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"(?i)\b(?:published|date)\s*:\s*(\d{4}-\d{2}-\d{2})").expect("valid pattern")
    })
}

/// Strip HTML tags and decode the handful of entities that occur in
/// signature pages; returns (title, text).
fn html_to_text(page: &str) -> (Option<String>, String) {
    let title = Regex::new(r"(?is)<title[^>]*>(.*?)</title>")
        .expect("valid pattern")
        .captures(page)
        .map(|c| c[1].trim().to_string())
        .filter(|t| !t.is_empty());
    let mut text = String::with_capacity(page.len());
    let mut in_tag = false;
    for c in page.chars() {
        match c {
            '<' => {
                in_tag = true;
                // Tags separate words; keep token boundaries intact.
                text.push(' ');
            }
            '>' => in_tag = false,
            c if !in_tag => text.push(c),
            _ => {}
        }
    }
    let text = text
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&nbsp;", " ");
    (title, text)
}

fn looks_like_html(raw: &str, path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("html") | Some("htm")
    ) || raw.trim_start().starts_with('<')
}

struct Block {
    signature_id: Option<String>,
    text: String,
}

fn split_blocks(title: Option<String>, text: &str) -> Vec<Block> {
    let markers: Vec<(usize, String)> = marker_pattern()
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("whole match");
            (m.start(), c[1].to_string())
        })
        .collect();
    if markers.is_empty() {
        let signature_id = title.or_else(|| {
            text.lines()
                .map(str::trim)
                .find(|l| !l.is_empty())
                .map(|l| l.to_string())
        });
        return vec![Block {
            signature_id,
            text: text.to_string(),
        }];
    }
    let mut blocks = Vec::new();
    for (i, (start, id)) in markers.iter().enumerate() {
        let end = markers.get(i + 1).map(|(s, _)| *s).unwrap_or(text.len());
        blocks.push(Block {
            signature_id: Some(id.clone()),
            text: text[*start..end].to_string(),
        });
    }
    blocks
}

fn parse_page(
    vendor: Vendor,
    path: &Path,
    diag: &mut Diagnostics,
    out: &mut Vec<VendorSignatureEntry>,
) -> Result<(), IngestError> {
    let raw = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (title, text) = if looks_like_html(&raw, path) {
        html_to_text(&raw)
    } else {
        (None, raw.clone())
    };
    let page_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    for (block_index, block) in split_blocks(title, &text).into_iter().enumerate() {
        diag.records_in += 1;
        let Some(signature_id) = block.signature_id else {
            diag.skip(
                format!("{page_name}#{block_index}"),
                "no extractable signature id",
            );
            continue;
        };
        let published_date = date_pattern()
            .captures(&block.text)
            .and_then(|c| NaiveDate::parse_from_str(&c[1], "%Y-%m-%d").ok());
        // Title text participates in extraction even when it is not part of
        // the block body.
        let mut mention_text = block.text.clone();
        mention_text.push(' ');
        mention_text.push_str(&signature_id);
        out.push(VendorSignatureEntry {
            vendor,
            signature_id,
            description: block.text.trim().to_string(),
            mentioned_cves: extract_cve_ids(&mention_text),
            published_date,
        });
    }
    Ok(())
}

/// Parse all signature pages for one vendor from a file or directory.
///
/// Directories are walked non-recursively in sorted file order so results
/// are deterministic. Pages with no extractable signature id are skipped
/// with a diagnostic; pages without CVE mentions are retained with an empty
/// mention set.
pub fn parse_vendor_signatures(
    vendor: Vendor,
    path: &Path,
) -> Result<(Vec<VendorSignatureEntry>, Diagnostics), IngestError> {
    let mut diag = Diagnostics::default();
    let mut entries = Vec::new();
    if path.is_dir() {
        let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(path)
            .map_err(|source| IngestError::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for file in files {
            parse_page(vendor, &file, &mut diag, &mut entries)?;
        }
    } else if path.is_file() {
        parse_page(vendor, path, &mut diag, &mut entries)?;
    } else {
        return Err(IngestError::MissingFile(path.to_path_buf()));
    }
    diag.records_out = entries.len();
    debug_assert!(diag.is_consistent());
    Ok((entries, diag))
}
