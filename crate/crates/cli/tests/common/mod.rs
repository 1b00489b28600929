//! Synthetic fixture corpus shared by the end-to-end and acceptance tests.
//!
//! Generates the four raw inputs (NVD feed, tweet dump, vendor signature
//! pages, PoC listing + map), a keyword file, and a config file, all
//! deterministically from one seed, and reports the ground-truth counts so
//! tests can check joins against the construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub struct FixtureParams {
    pub seed: u64,
    /// (year, CVE count) pairs.
    pub cves_per_year: Vec<(u16, usize)>,
    /// Fraction of CVEs mentioned by at least one tweet.
    pub mention_rate: f64,
    /// Tweets to generate.
    pub tweet_count: usize,
    /// Fraction of mentioned CVEs with real-world vendor evidence.
    pub rw_rate: f64,
    /// Fraction of all CVEs with a PoC listing entry.
    pub poc_rate: f64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            seed: 42,
            cves_per_year: vec![(2015, 50), (2016, 50), (2017, 50), (2018, 50)],
            mention_rate: 0.8,
            tweet_count: 800,
            rw_rate: 0.15,
            poc_rate: 0.18,
        }
    }
}

// Not every test target reads every manifest field.
#[allow(dead_code)]
pub struct FixtureManifest {
    pub total_cves: usize,
    pub mentioned_cves: BTreeSet<String>,
    pub rw_cves: BTreeSet<String>,
    pub poc_cves: BTreeSet<String>,
    pub per_year_total: BTreeMap<u16, usize>,
    pub per_year_mentioned: BTreeMap<u16, usize>,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
}

struct SynthCve {
    id: String,
    year: u16,
    month: u32,
    day: u32,
    description: String,
    has_v2: bool,
    has_v3: bool,
}

const VENDORS: [&str; 6] = ["acme", "globex", "initech", "umbrella", "hooli", "wonka"];
const PRODUCTS: [&str; 8] = [
    "router", "webapp", "kernel", "browser", "mailer", "scanner", "gateway", "agent",
];
const PHRASES: [&str; 6] = [
    "allows remote attackers to execute arbitrary code via crafted packets",
    "improper input validation leads to denial of service",
    "buffer overflow in the parsing component allows privilege escalation",
    "information disclosure through uninitialized memory",
    "allows attackers to bypass authentication using a crafted header",
    "use-after-free during session teardown enables remote code execution",
];
const TWEET_TEMPLATES: [&str; 8] = [
    "new 0day dropping for {CVE}, patch now",
    "advisory published for {CVE}: {PHRASE}",
    "beware: exploit for {CVE} seen in the wild",
    "fix available for {CVE}, update your systems",
    "poc for {CVE} on the usual archive",
    "{CVE} looks serious, rce confirmed",
    "scanner rules updated for {CVE}",
    "ssl stack affected by {CVE}, details soon",
];

fn pick<'a, T>(rng: &mut ChaCha20Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn gen_cves(rng: &mut ChaCha20Rng, params: &FixtureParams) -> Vec<SynthCve> {
    let mut cves = Vec::new();
    for &(year, count) in &params.cves_per_year {
        let mut sequences = BTreeSet::new();
        while sequences.len() < count {
            sequences.insert(rng.random_range(1000u32..99999));
        }
        for seq in sequences {
            cves.push(SynthCve {
                id: format!("CVE-{year}-{seq:04}"),
                year,
                month: rng.random_range(1..=12),
                day: rng.random_range(1..=28),
                description: format!(
                    "A vulnerability in the {} {} {}.",
                    pick(rng, &VENDORS),
                    pick(rng, &PRODUCTS),
                    pick(rng, &PHRASES)
                ),
                has_v2: rng.random_bool(0.9),
                has_v3: rng.random_bool(0.7),
            });
        }
    }
    cves
}

fn cvss2_value(rng: &mut ChaCha20Rng) -> serde_json::Value {
    let av = *pick(rng, &["L", "A", "N"]);
    let ac = *pick(rng, &["H", "M", "L"]);
    let au = *pick(rng, &["M", "S", "N"]);
    let imp = |rng: &mut ChaCha20Rng| *pick(rng, &["N", "P", "C"]);
    let (c, i, a) = (imp(rng), imp(rng), imp(rng));
    serde_json::json!({
        "cvssV2": {
            "vectorString": format!("AV:{av}/AC:{ac}/Au:{au}/C:{c}/I:{i}/A:{a}"),
            "baseScore": (rng.random_range(10..=100) as f64) / 10.0
        },
        "impactScore": (rng.random_range(0..=100) as f64) / 10.0,
        "exploitabilityScore": (rng.random_range(0..=100) as f64) / 10.0
    })
}

fn cvss3_value(rng: &mut ChaCha20Rng) -> serde_json::Value {
    let av = *pick(rng, &["P", "L", "A", "N"]);
    let ac = *pick(rng, &["H", "L"]);
    let pr = *pick(rng, &["H", "L", "N"]);
    let ui = *pick(rng, &["R", "N"]);
    let s = *pick(rng, &["U", "C"]);
    let imp = |rng: &mut ChaCha20Rng| *pick(rng, &["N", "L", "H"]);
    let (c, i, a) = (imp(rng), imp(rng), imp(rng));
    serde_json::json!({
        "cvssV3": {
            "vectorString": format!("CVSS:3.0/AV:{av}/AC:{ac}/PR:{pr}/UI:{ui}/S:{s}/C:{c}/I:{i}/A:{a}"),
            "baseScore": (rng.random_range(10..=100) as f64) / 10.0
        },
        "impactScore": (rng.random_range(0..=60) as f64) / 10.0,
        "exploitabilityScore": (rng.random_range(0..=39) as f64) / 10.0
    })
}

fn nvd_entry(rng: &mut ChaCha20Rng, cve: &SynthCve) -> serde_json::Value {
    let mut references = Vec::new();
    for _ in 0..rng.random_range(0..5) {
        let tags: Vec<&str> = match rng.random_range(0..4) {
            0 => vec!["Patch"],
            1 => vec!["Vendor Advisory"],
            2 => vec!["Exploit", "Third Party Advisory"],
            _ => vec![],
        };
        references.push(serde_json::json!({
            "url": format!("https://example.com/ref/{}", rng.random_range(0..100000)),
            "tags": tags
        }));
    }
    let mut impact = serde_json::Map::new();
    if cve.has_v2 {
        impact.insert("baseMetricV2".into(), cvss2_value(rng));
    }
    if cve.has_v3 {
        impact.insert("baseMetricV3".into(), cvss3_value(rng));
    }
    let cpe_count = rng.random_range(1..4);
    let cpes: Vec<serde_json::Value> = (0..cpe_count)
        .map(|_| {
            serde_json::json!({
                "cpe23Uri": format!(
                    "cpe:2.3:a:{}:{}:{}:*:*:*:*:*:*:*",
                    pick(rng, &VENDORS),
                    pick(rng, &PRODUCTS),
                    rng.random_range(1..9)
                )
            })
        })
        .collect();
    serde_json::json!({
        "cve": {
            "CVE_data_meta": {"ID": cve.id},
            "problemtype": {"problemtype_data": [{"description": [{"lang": "en", "value": format!("CWE-{}", rng.random_range(20..800))}]}]},
            "references": {"reference_data": references},
            "description": {"description_data": [{"lang": "en", "value": cve.description}]}
        },
        "configurations": {"nodes": [{"cpe_match": cpes, "children": []}]},
        "impact": impact,
        "publishedDate": format!("{}-{:02}-{:02}T10:00Z", cve.year, cve.month, cve.day)
    })
}

/// Generate the corpus under `dir` and return the manifest. The pipeline
/// output directory is `dir/out`.
pub fn write_corpus(dir: &Path, params: &FixtureParams) -> FixtureManifest {
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let data_dir = dir.join("data");
    std::fs::create_dir_all(&data_dir).unwrap();

    let cves = gen_cves(&mut rng, params);
    let mut per_year_total: BTreeMap<u16, usize> = BTreeMap::new();
    for cve in &cves {
        *per_year_total.entry(cve.year).or_default() += 1;
    }

    // NVD feed.
    let entries: Vec<serde_json::Value> = cves.iter().map(|c| nvd_entry(&mut rng, c)).collect();
    let feed = serde_json::json!({
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_Items": entries
    });
    std::fs::write(
        data_dir.join("nvd.json"),
        serde_json::to_string_pretty(&feed).unwrap(),
    )
    .unwrap();

    // Mentioned subset, weighted toward a popular head.
    let mention_target = ((cves.len() as f64) * params.mention_rate).round() as usize;
    let mut indices: Vec<usize> = (0..cves.len()).collect();
    for i in 0..indices.len() {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
    }
    let mentioned_idx: Vec<usize> = indices[..mention_target].to_vec();
    let mentioned_cves: BTreeSet<String> =
        mentioned_idx.iter().map(|&i| cves[i].id.clone()).collect();
    let mut per_year_mentioned: BTreeMap<u16, usize> = BTreeMap::new();
    for &i in &mentioned_idx {
        *per_year_mentioned.entry(cves[i].year).or_default() += 1;
    }

    // Tweet dump. Every mentioned CVE gets at least one tweet; the rest of
    // the volume goes to a popularity-weighted head.
    let users: Vec<(String, u64, bool)> = (0..30)
        .map(|i| {
            (
                format!("user{i:02}"),
                rng.random_range(50..100_000),
                rng.random_bool(0.2),
            )
        })
        .collect();
    let mut tweet_lines = Vec::new();
    let mut tweet_no = 0usize;
    let emit_tweet = |rng: &mut ChaCha20Rng, cve: &SynthCve, tweet_no: usize| -> String {
        let (user, followers, verified) = pick(rng, &users).clone();
        let template = *pick(rng, &TWEET_TEMPLATES);
        let text = template
            .replace("{CVE}", &cve.id)
            .replace("{PHRASE}", pick(rng, &PHRASES));
        serde_json::json!({
            "tweet_id": format!("t{tweet_no:06}"),
            "author_id": user,
            "posted_at": format!(
                "{}-{:02}-{:02}T{:02}:{:02}:00Z",
                cve.year,
                rng.random_range(cve.month..=12),
                rng.random_range(1..=28),
                rng.random_range(0..24),
                rng.random_range(0..60)
            ),
            "text": text,
            "retweet_count": rng.random_range(0..50),
            "favorite_count": rng.random_range(0..80),
            "author_followers": followers,
            "author_friends": rng.random_range(0..2000),
            "author_verified": verified,
            "hashtag_count": rng.random_range(0..4),
            "url_count": rng.random_range(0..3)
        })
        .to_string()
    };
    for &i in &mentioned_idx {
        tweet_lines.push(emit_tweet(&mut rng, &cves[i], tweet_no));
        tweet_no += 1;
    }
    while tweet_no < params.tweet_count {
        // Head-heavy popularity: square the random draw.
        let r: f64 = rng.random();
        let pos = ((r * r) * mentioned_idx.len() as f64) as usize;
        let idx = mentioned_idx[pos.min(mentioned_idx.len() - 1)];
        tweet_lines.push(emit_tweet(&mut rng, &cves[idx], tweet_no));
        tweet_no += 1;
    }
    std::fs::write(data_dir.join("tweets.jsonl"), tweet_lines.join("\n")).unwrap();

    // Real-world evidence: vendor signature pages over a mentioned subset
    // (plus a few unmentioned CVEs, which is realistic).
    let mut rw_pool: Vec<usize> = mentioned_idx.clone();
    for i in 0..rw_pool.len() {
        let j = rng.random_range(i..rw_pool.len());
        rw_pool.swap(i, j);
    }
    let rw_count = ((mentioned_idx.len() as f64) * params.rw_rate).round() as usize;
    let rw_idx: Vec<usize> = rw_pool[..rw_count.max(1)].to_vec();
    let rw_cves: BTreeSet<String> = rw_idx.iter().map(|&i| cves[i].id.clone()).collect();

    let vendor_dirs = ["symantec_av", "avast", "eset"];
    for vendor_dir in vendor_dirs {
        std::fs::create_dir_all(data_dir.join("vendors").join(vendor_dir)).unwrap();
    }
    // Every RW CVE appears for at least one vendor; vendors overlap.
    for (slot, &idx) in rw_idx.iter().enumerate() {
        let cve = &cves[idx];
        let mut targets = vec![vendor_dirs[slot % vendor_dirs.len()]];
        if rng.random_bool(0.4) {
            targets.push(vendor_dirs[(slot + 1) % vendor_dirs.len()]);
        }
        for vendor_dir in targets {
            let page = format!(
                "<html><head><title>Sig.{}.{slot}</title></head><body>\
                 <h1>Threat signature</h1>\
                 <p>Detects an attack exploiting {} {}.</p>\
                 <p>Published: {}-{:02}-{:02}</p>\
                 </body></html>",
                vendor_dir, cve.id, cve.description, cve.year, cve.month, cve.day
            );
            std::fs::write(
                data_dir
                    .join("vendors")
                    .join(vendor_dir)
                    .join(format!("sig_{slot:03}_{vendor_dir}.html")),
                page,
            )
            .unwrap();
        }
    }
    // A few pages with no CVE mention at all.
    for vendor_dir in vendor_dirs {
        let page = "<html><head><title>Generic.Heuristic</title></head>\
                    <body><p>Behavioral detection for suspicious droppers.</p></body></html>";
        std::fs::write(
            data_dir
                .join("vendors")
                .join(vendor_dir)
                .join("zz_generic.html"),
            page,
        )
        .unwrap();
    }

    // PoC listing + map; a couple of unmapped rows exercise the join
    // diagnostics.
    let poc_count = ((cves.len() as f64) * params.poc_rate).round() as usize;
    let mut poc_pool: Vec<usize> = (0..cves.len()).collect();
    for i in 0..poc_pool.len() {
        let j = rng.random_range(i..poc_pool.len());
        poc_pool.swap(i, j);
    }
    let poc_idx: Vec<usize> = poc_pool[..poc_count.max(1)].to_vec();
    let poc_cves: BTreeSet<String> = poc_idx.iter().map(|&i| cves[i].id.clone()).collect();
    let mut listing = String::from("id,file,description,date\n");
    let mut map = String::from("edb_id,cve_id\n");
    for (slot, &idx) in poc_idx.iter().enumerate() {
        let cve = &cves[idx];
        let edb_id = 40000 + slot;
        writeln!(
            listing,
            "{edb_id},exploits/{}/x_{slot}.py,poc exploit for {},{}-{:02}-{:02}",
            cve.year, cve.id, cve.year, cve.month, cve.day
        )
        .unwrap();
        writeln!(map, "{edb_id},{}", cve.id).unwrap();
    }
    // Unmapped listing rows.
    writeln!(
        listing,
        "99901,misc/orphan_a.txt,unmapped exploit,2018-01-01"
    )
    .unwrap();
    writeln!(
        listing,
        "99902,misc/orphan_b.txt,unmapped exploit,2018-02-01"
    )
    .unwrap();
    std::fs::write(data_dir.join("poc_listing.csv"), listing).unwrap();
    std::fs::write(data_dir.join("poc_cve_map.csv"), map).unwrap();

    // Keyword file: the crate's default 36 terms.
    let keywords = exploit_detect::features::KeywordList::default_terms();
    let mut keyword_text = keywords.terms().join("\n");
    keyword_text.push('\n');
    std::fs::write(data_dir.join("keywords.txt"), keyword_text).unwrap();

    let years: Vec<u16> = params.cves_per_year.iter().map(|&(y, _)| y).collect();
    let year_lo = *years.iter().min().unwrap();
    let year_hi = *years.iter().max().unwrap();
    let output_dir = dir.join("out");
    let config_path = dir.join("config.toml");
    let config = format!(
        r#"[data]
nvd = "{data}/nvd.json"
tweets = "{data}/tweets.jsonl"
poc_listing = "{data}/poc_listing.csv"
poc_cve_map = "{data}/poc_cve_map.csv"
keywords = "{data}/keywords.txt"

[data.vendor_dirs]
SYMANTEC_AV = "{data}/vendors/symantec_av"
AVAST = "{data}/vendors/avast"
ESET = "{data}/vendors/eset"

[ground_truth]
sources = ["EDB", "SYMANTEC_AV", "AVAST", "ESET"]

[experiment]
kind = "CV"
label = "RW"
k = 10
seed = {seed}
year_range = [{year_lo}, {year_hi}]
output_dir = "{out}"

[[classifier]]
kind = "GBDT"

[classifier.params]
n_trees = 120
depth = 4

[sampler]
kind = "ALLKNN"
k_max = 3
"#,
        data = data_dir.display(),
        out = output_dir.display(),
        seed = params.seed,
    );
    std::fs::write(&config_path, config).unwrap();

    FixtureManifest {
        total_cves: cves.len(),
        mentioned_cves,
        rw_cves,
        poc_cves,
        per_year_total,
        per_year_mentioned,
        config_path,
        output_dir,
    }
}

/// Read a directory tree into (relative path -> bytes) for byte-identity
/// comparisons.
pub fn snapshot_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}
