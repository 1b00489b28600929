//! Exploit-prediction pipeline for disclosed vulnerabilities.
//!
//! Classifies CVEs as exploited / not-exploited from features derived from
//! tweet corpora and public vulnerability databases. The crate covers the
//! whole pipeline:
//!
//! - [`model`] — domain types (CVE ids, CVSS vectors, tweets, instances) and
//!   dataset assembly.
//! - [`ingest`] — file-based parsers for the four raw sources: NVD JSON
//!   feeds, tweet dumps, antivirus/IPS signature pages, and PoC exploit
//!   listings.
//! - [`groundtruth`] — merges per-vendor exploit evidence into PoC and
//!   real-world label sets and emits coverage/intersection reports.
//! - [`features`] — the 79-dimensional feature vector per CVE and train-only
//!   standardization.
//! - [`balance`] — training-set resamplers: SMOTE, ADASYN, AllKNN, and
//!   random undersampling.
//! - [`learn`] — classifiers behind a common train/score interface: L2
//!   logistic regression, linear SVM, and gradient-boosted trees.
//! - [`eval`] — metrics, PR curves, stratified cross-validation, paired
//!   t-tests, and temporal-window experiments.
//!
//! All randomness is seeded; identical inputs and seeds reproduce identical
//! outputs byte for byte.

pub mod balance;
pub mod eval;
pub mod features;
pub mod groundtruth;
pub mod ingest;
pub mod learn;
pub mod model;
pub mod seeds;
