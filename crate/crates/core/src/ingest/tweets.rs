//! Tweet-dump parser: UTF-8, one JSON object per line.

use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::Deserialize;

use crate::model::TweetRecord;

use super::{Diagnostics, IngestError};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTweet {
    tweet_id: String,
    author_id: String,
    posted_at: String,
    text: String,
    retweet_count: u64,
    favorite_count: u64,
    author_followers: u64,
    author_friends: u64,
    author_verified: bool,
    hashtag_count: u64,
    url_count: u64,
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S")
        .ok()
        .map(|naive| naive.and_utc())
}

/// Load a line-delimited tweet dump. Lines that are not valid records
/// (bad JSON, missing or negative fields, unparseable timestamp) are
/// skipped with a diagnostic; an unreadable file is fatal.
pub fn load_tweets(path: &Path) -> Result<(Vec<TweetRecord>, Diagnostics), IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut diag = Diagnostics::default();
    let mut records = Vec::new();
    for (line_index, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        diag.records_in += 1;
        let locator = format!("line {}", line_index + 1);
        let raw: RawTweet = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(e) => {
                diag.skip(locator, format!("invalid record: {e}"));
                continue;
            }
        };
        let Some(posted_at) = parse_timestamp(&raw.posted_at) else {
            diag.skip(
                locator,
                format!("unparseable posted_at {:?}", raw.posted_at),
            );
            continue;
        };
        records.push(TweetRecord::new(
            raw.tweet_id,
            raw.author_id,
            posted_at,
            raw.text,
            raw.retweet_count,
            raw.favorite_count,
            raw.author_followers,
            raw.author_friends,
            raw.author_verified,
            raw.hashtag_count,
            raw.url_count,
        ));
    }
    diag.records_out = records.len();
    debug_assert!(diag.is_consistent());
    Ok((records, diag))
}
