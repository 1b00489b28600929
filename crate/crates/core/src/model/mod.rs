//! Core domain types and per-CVE instance assembly.
//!
//! A [`CveId`] identifies a disclosed vulnerability; a [`CveRecord`] carries
//! the public-database metadata for one CVE; a [`TweetRecord`] is one tweet
//! with author statistics and the CVE numbers it mentions. Assembly joins
//! the three sources into one [`Instance`] per tweeted CVE.

mod cve;
mod cvss;
mod dataset;
mod tweet;

pub use cve::{extract_cve_ids, CveId, CveIdError};
pub use cvss::{
    AccessComplexity, AccessVector, AttackComplexity, AttackVector, Authentication, CvssParseError,
    CvssV2Vector, CvssV3Vector, ImpactV2, ImpactV3, PrivilegesRequired, Scope, UserInteraction,
};
pub use dataset::{
    assemble_dataset, AssemblyDiagnostics, CpeEntry, CveRecord, Dataset, Instance, ModelError,
    Reference,
};
pub use tweet::TweetRecord;
