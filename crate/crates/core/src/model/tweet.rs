//! Tweet records with author statistics.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::cve::{extract_cve_ids, CveId};

/// One ingested tweet, with the statistics used by the feature extractor
/// and the CVE numbers extracted from its text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub posted_at: DateTime<Utc>,
    pub text: String,
    pub retweet_count: u64,
    pub favorite_count: u64,
    pub author_followers: u64,
    pub author_friends: u64,
    pub author_verified: bool,
    pub hashtag_count: u64,
    pub url_count: u64,
    /// CVE numbers mentioned in `text`; derived at construction.
    pub mentioned_cves: BTreeSet<CveId>,
}

impl TweetRecord {
    /// Build a record, deriving `mentioned_cves` from the text.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tweet_id: String,
        author_id: String,
        posted_at: DateTime<Utc>,
        text: String,
        retweet_count: u64,
        favorite_count: u64,
        author_followers: u64,
        author_friends: u64,
        author_verified: bool,
        hashtag_count: u64,
        url_count: u64,
    ) -> Self {
        let mentioned_cves = extract_cve_ids(&text);
        TweetRecord {
            tweet_id,
            author_id,
            posted_at,
            text,
            retweet_count,
            favorite_count,
            author_followers,
            author_friends,
            author_verified,
            hashtag_count,
            url_count,
            mentioned_cves,
        }
    }
}
