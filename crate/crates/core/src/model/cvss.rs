//! CVSS 2.0 / 3.x severity vectors.
//!
//! Categorical metrics carry a declared severity order (least severe = 0)
//! used by the feature encoder. Vector strings from NVD feeds parse via
//! [`CvssV2Vector::from_vector_string`] / [`CvssV3Vector::from_vector_string`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CvssParseError {
    #[error("score {value} for {field} outside [0, 10]")]
    ScoreOutOfRange { field: &'static str, value: String },
    #[error("unknown value {value:?} for CVSS metric {metric}")]
    UnknownMetricValue { metric: &'static str, value: String },
    #[error("missing CVSS metric {0} in vector string")]
    MissingMetric(&'static str),
    #[error("malformed CVSS vector component {0:?}")]
    MalformedComponent(String),
}

fn check_score(field: &'static str, value: f64) -> Result<f64, CvssParseError> {
    if value.is_finite() && (0.0..=10.0).contains(&value) {
        Ok(value)
    } else {
        Err(CvssParseError::ScoreOutOfRange {
            field,
            value: value.to_string(),
        })
    }
}

macro_rules! ordinal_metric {
    ($(#[$meta:meta])* $name:ident, $metric:literal, { $($variant:ident = $ord:expr, [$($tok:literal),+];)+ }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        #[serde(rename_all = "SCREAMING_SNAKE_CASE")]
        pub enum $name {
            $($variant,)+
        }

        impl $name {
            /// Severity rank used by the feature encoder (0 = least severe).
            pub fn ordinal(self) -> f64 {
                match self {
                    $(Self::$variant => $ord as f64,)+
                }
            }

            /// Parse either the vector-string token or the spelled-out NVD
            /// field value.
            pub fn parse_token(token: &str) -> Result<Self, CvssParseError> {
                match token {
                    $($($tok)|+ => Ok(Self::$variant),)+
                    other => Err(CvssParseError::UnknownMetricValue {
                        metric: $metric,
                        value: other.to_string(),
                    }),
                }
            }
        }
    };
}

ordinal_metric!(
    /// CVSS 2.0 access vector (`AV`).
    AccessVector, "AV", {
        Local = 0, ["L", "LOCAL"];
        AdjacentNetwork = 1, ["A", "ADJACENT_NETWORK"];
        Network = 2, ["N", "NETWORK"];
    }
);

ordinal_metric!(
    /// CVSS 2.0 access complexity (`AC`); low complexity is the most severe.
    AccessComplexity, "AC", {
        High = 0, ["H", "HIGH"];
        Medium = 1, ["M", "MEDIUM"];
        Low = 2, ["L", "LOW"];
    }
);

ordinal_metric!(
    /// CVSS 2.0 authentication requirement (`Au`).
    Authentication, "Au", {
        Multiple = 0, ["M", "MULTIPLE"];
        Single = 1, ["S", "SINGLE"];
        None = 2, ["N", "NONE"];
    }
);

ordinal_metric!(
    /// CVSS 2.0 impact level (`C`/`I`/`A`).
    ImpactV2, "C/I/A", {
        None = 0, ["N", "NONE"];
        Partial = 1, ["P", "PARTIAL"];
        Complete = 2, ["C", "COMPLETE"];
    }
);

ordinal_metric!(
    /// CVSS 3.x attack vector (`AV`).
    AttackVector, "AV", {
        Physical = 0, ["P", "PHYSICAL"];
        Local = 1, ["L", "LOCAL"];
        Adjacent = 2, ["A", "ADJACENT_NETWORK", "ADJACENT"];
        Network = 3, ["N", "NETWORK"];
    }
);

ordinal_metric!(
    /// CVSS 3.x attack complexity (`AC`).
    AttackComplexity, "AC", {
        High = 0, ["H", "HIGH"];
        Low = 1, ["L", "LOW"];
    }
);

ordinal_metric!(
    /// CVSS 3.x privileges required (`PR`).
    PrivilegesRequired, "PR", {
        High = 0, ["H", "HIGH"];
        Low = 1, ["L", "LOW"];
        None = 2, ["N", "NONE"];
    }
);

ordinal_metric!(
    /// CVSS 3.x user interaction (`UI`).
    UserInteraction, "UI", {
        Required = 0, ["R", "REQUIRED"];
        None = 1, ["N", "NONE"];
    }
);

ordinal_metric!(
    /// CVSS 3.x scope (`S`).
    Scope, "S", {
        Unchanged = 0, ["U", "UNCHANGED"];
        Changed = 1, ["C", "CHANGED"];
    }
);

ordinal_metric!(
    /// CVSS 3.x impact level (`C`/`I`/`A`).
    ImpactV3, "C/I/A", {
        None = 0, ["N", "NONE"];
        Low = 1, ["L", "LOW"];
        High = 2, ["H", "HIGH"];
    }
);

fn split_components(vector: &str) -> impl Iterator<Item = Result<(&str, &str), CvssParseError>> {
    vector
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split('/')
        .filter(|c| !c.is_empty())
        .map(|component| {
            component
                .split_once(':')
                .ok_or_else(|| CvssParseError::MalformedComponent(component.to_string()))
        })
}

/// CVSS 2.0 vector: three subscores plus six categorical-ordinal metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvssV2Vector {
    pub base_score: f64,
    pub impact_subscore: f64,
    pub exploitability_subscore: f64,
    pub access_vector: AccessVector,
    pub access_complexity: AccessComplexity,
    pub authentication: Authentication,
    pub conf_impact: ImpactV2,
    pub integ_impact: ImpactV2,
    pub avail_impact: ImpactV2,
}

impl CvssV2Vector {
    /// Decode a vector string such as `AV:L/AC:M/Au:N/C:C/I:N/A:N`, attaching
    /// the numeric scores reported alongside it.
    pub fn from_vector_string(
        vector: &str,
        base_score: f64,
        impact_subscore: f64,
        exploitability_subscore: f64,
    ) -> Result<Self, CvssParseError> {
        let mut av = None;
        let mut ac = None;
        let mut au = None;
        let mut c = None;
        let mut i = None;
        let mut a = None;
        for component in split_components(vector) {
            let (metric, value) = component?;
            match metric {
                "AV" => av = Some(AccessVector::parse_token(value)?),
                "AC" => ac = Some(AccessComplexity::parse_token(value)?),
                "Au" | "AU" => au = Some(Authentication::parse_token(value)?),
                "C" => c = Some(ImpactV2::parse_token(value)?),
                "I" => i = Some(ImpactV2::parse_token(value)?),
                "A" => a = Some(ImpactV2::parse_token(value)?),
                // Temporal/environmental metrics are allowed but unused.
                _ => {}
            }
        }
        Ok(CvssV2Vector {
            base_score: check_score("base_score", base_score)?,
            impact_subscore: check_score("impact_subscore", impact_subscore)?,
            exploitability_subscore: check_score(
                "exploitability_subscore",
                exploitability_subscore,
            )?,
            access_vector: av.ok_or(CvssParseError::MissingMetric("AV"))?,
            access_complexity: ac.ok_or(CvssParseError::MissingMetric("AC"))?,
            authentication: au.ok_or(CvssParseError::MissingMetric("Au"))?,
            conf_impact: c.ok_or(CvssParseError::MissingMetric("C"))?,
            integ_impact: i.ok_or(CvssParseError::MissingMetric("I"))?,
            avail_impact: a.ok_or(CvssParseError::MissingMetric("A"))?,
        })
    }
}

/// CVSS 3.x vector: three subscores plus eight categorical-ordinal metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvssV3Vector {
    pub base_score: f64,
    pub impact_subscore: f64,
    pub exploitability_subscore: f64,
    pub attack_vector: AttackVector,
    pub attack_complexity: AttackComplexity,
    pub privileges_required: PrivilegesRequired,
    pub user_interaction: UserInteraction,
    pub scope: Scope,
    pub conf_impact: ImpactV3,
    pub integ_impact: ImpactV3,
    pub avail_impact: ImpactV3,
}

impl CvssV3Vector {
    /// Decode a vector string such as
    /// `CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H` (the version prefix is
    /// optional), attaching the numeric scores reported alongside it.
    pub fn from_vector_string(
        vector: &str,
        base_score: f64,
        impact_subscore: f64,
        exploitability_subscore: f64,
    ) -> Result<Self, CvssParseError> {
        let mut av = None;
        let mut ac = None;
        let mut pr = None;
        let mut ui = None;
        let mut s = None;
        let mut c = None;
        let mut i = None;
        let mut a = None;
        for component in split_components(vector) {
            let (metric, value) = component?;
            match metric {
                "CVSS" => {}
                "AV" => av = Some(AttackVector::parse_token(value)?),
                "AC" => ac = Some(AttackComplexity::parse_token(value)?),
                "PR" => pr = Some(PrivilegesRequired::parse_token(value)?),
                "UI" => ui = Some(UserInteraction::parse_token(value)?),
                "S" => s = Some(Scope::parse_token(value)?),
                "C" => c = Some(ImpactV3::parse_token(value)?),
                "I" => i = Some(ImpactV3::parse_token(value)?),
                "A" => a = Some(ImpactV3::parse_token(value)?),
                _ => {}
            }
        }
        Ok(CvssV3Vector {
            base_score: check_score("base_score", base_score)?,
            impact_subscore: check_score("impact_subscore", impact_subscore)?,
            exploitability_subscore: check_score(
                "exploitability_subscore",
                exploitability_subscore,
            )?,
            attack_vector: av.ok_or(CvssParseError::MissingMetric("AV"))?,
            attack_complexity: ac.ok_or(CvssParseError::MissingMetric("AC"))?,
            privileges_required: pr.ok_or(CvssParseError::MissingMetric("PR"))?,
            user_interaction: ui.ok_or(CvssParseError::MissingMetric("UI"))?,
            scope: s.ok_or(CvssParseError::MissingMetric("S"))?,
            conf_impact: c.ok_or(CvssParseError::MissingMetric("C"))?,
            integ_impact: i.ok_or(CvssParseError::MissingMetric("I"))?,
            avail_impact: a.ok_or(CvssParseError::MissingMetric("A"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v2_meltdown_vector_decodes() {
        let v =
            CvssV2Vector::from_vector_string("AV:L/AC:M/Au:N/C:C/I:N/A:N", 4.7, 6.9, 3.4).unwrap();
        assert_eq!(v.access_vector, AccessVector::Local);
        assert_eq!(v.access_complexity, AccessComplexity::Medium);
        assert_eq!(v.authentication, Authentication::None);
        assert_eq!(v.conf_impact, ImpactV2::Complete);
        assert_eq!(v.integ_impact, ImpactV2::None);
        assert_eq!(v.avail_impact, ImpactV2::None);
    }

    #[test]
    fn v2_parenthesized_vector_accepted() {
        let v = CvssV2Vector::from_vector_string("(AV:N/AC:L/Au:N/C:P/I:P/A:P)", 7.5, 6.4, 10.0)
            .unwrap();
        assert_eq!(v.access_vector.ordinal(), 2.0);
        assert_eq!(v.access_complexity.ordinal(), 2.0);
        assert_eq!(v.authentication.ordinal(), 2.0);
        assert_eq!(v.conf_impact.ordinal(), 1.0);
    }

    #[test]
    fn v3_vector_decodes_with_prefix() {
        let v = CvssV3Vector::from_vector_string(
            "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
            9.8,
            5.9,
            3.9,
        )
        .unwrap();
        assert_eq!(v.attack_vector, AttackVector::Network);
        assert_eq!(v.scope, Scope::Unchanged);
        assert_eq!(v.conf_impact.ordinal(), 2.0);
    }

    #[test]
    fn missing_metric_is_an_error() {
        let err =
            CvssV2Vector::from_vector_string("AV:L/AC:M/Au:N/C:C/I:N", 4.7, 6.9, 3.4).unwrap_err();
        assert_eq!(err, CvssParseError::MissingMetric("A"));
    }

    #[test]
    fn out_of_range_score_is_an_error() {
        assert!(
            CvssV2Vector::from_vector_string("AV:L/AC:M/Au:N/C:C/I:N/A:N", 10.5, 6.9, 3.4).is_err()
        );
    }

    #[test]
    fn unknown_token_is_an_error() {
        assert!(
            CvssV2Vector::from_vector_string("AV:X/AC:M/Au:N/C:C/I:N/A:N", 4.7, 6.9, 3.4).is_err()
        );
    }

    #[test]
    fn spelled_out_tokens_parse() {
        assert_eq!(
            AttackVector::parse_token("ADJACENT_NETWORK").unwrap(),
            AttackVector::Adjacent
        );
        assert_eq!(ImpactV2::parse_token("PARTIAL").unwrap(), ImpactV2::Partial);
    }
}
