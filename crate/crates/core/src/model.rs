//! Domain types shared by every stage: articles, media sources and the
//! closed label sets produced by the article analyzers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use crate::hash::fnv1a64;

/// Content-derived article identifier: FNV-1a of the canonical URL, as 16 hex digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArticleId(String);

impl ArticleId {
    pub fn for_url(canonical_url: &Url) -> Self {
        ArticleId(format!("{:016x}", fnv1a64(canonical_url.as_str().as_bytes())))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ArticleId {
    fn from(s: &str) -> Self {
        ArticleId(s.to_owned())
    }
}

impl fmt::Display for ArticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MediumId(pub String);

impl MediumId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for MediumId {
    fn from(s: &str) -> Self {
        MediumId(s.to_owned())
    }
}

impl fmt::Display for MediumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Ar,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Ar => "ar",
        }
    }
}

impl FromStr for Language {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Language::En),
            "ar" => Ok(Language::Ar),
            other => Err(UnknownLabel(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            /// Position in the declared label order.
            pub fn ordinal(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(UnknownLabel(other.to_owned())),
                }
            }
        }
    };
}

label_enum! {
    /// The six news sections an article can be filed under.
    SectionLabel {
        Entertainment => "entertainment",
        Sports => "sports",
        Business => "business",
        Technology => "technology",
        Politics => "politics",
        Health => "health",
    }
}

label_enum! {
    /// Five-bucket discretization of the propaganda index, in increasing order.
    PropagandaLabel {
        VeryUnlikely => "very_unlikely",
        Unlikely => "unlikely",
        Somehow => "somehow",
        Likely => "likely",
        VeryLikely => "very_likely",
    }
}

impl PropagandaLabel {
    /// Labels that the reader UI flags and that topic statistics count as propagandistic.
    pub fn is_propagandistic(self) -> bool {
        matches!(self, PropagandaLabel::Likely | PropagandaLabel::VeryLikely)
    }
}

label_enum! {
    StanceLabel {
        Agree => "agree",
        Disagree => "disagree",
        Discuss => "discuss",
        Unrelated => "unrelated",
    }
}

label_enum! {
    /// Topic-agnostic framing dimensions (the Media Frames Corpus inventory).
    FrameLabel {
        Economic => "economic",
        CapacityAndResources => "capacity_and_resources",
        Morality => "morality",
        FairnessAndEquality => "fairness_and_equality",
        Legality => "legality_constitutionality_jurisdiction",
        PolicyPrescription => "policy_prescription_and_evaluation",
        CrimeAndPunishment => "crime_and_punishment",
        SecurityAndDefense => "security_and_defense",
        HealthAndSafety => "health_and_safety",
        QualityOfLife => "quality_of_life",
        CulturalIdentity => "cultural_identity",
        PublicOpinion => "public_opinion",
        Political => "political",
        ExternalRegulation => "external_regulation_and_reputation",
        Other => "other",
    }
}

label_enum! {
    Factuality {
        Low => "low",
        Mixed => "mixed",
        High => "high",
    }
}

label_enum! {
    /// Seven-point left-to-right political bias scale.
    Bias {
        ExtremeLeft => "extreme_left",
        Left => "left",
        CenterLeft => "center_left",
        Center => "center",
        CenterRight => "center_right",
        Right => "right",
        ExtremeRight => "extreme_right",
    }
}

impl Bias {
    /// Signed position on the scale, -3 (extreme left) to 3 (extreme right).
    pub fn position(self) -> i32 {
        self.ordinal() as i32 - 3
    }

    /// Distance from the center in [0, 1]; displayed as hyper-partisanship.
    pub fn hyper_partisanship(self) -> f64 {
        f64::from(self.position().abs()) / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagandaResult {
    pub index: f64,
    pub label: PropagandaLabel,
}

pub type ClaimId = String;

/// One ingested news item plus its analysis annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: ArticleId,
    pub canonical_url: Url,
    pub medium_id: MediumId,
    pub title: String,
    pub body: String,
    pub language: Language,
    pub published_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propaganda: Option<PropagandaResult>,
    #[serde(default)]
    pub stances: BTreeMap<ClaimId, StanceLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_distribution: Option<BTreeMap<FrameLabel, f64>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InvariantViolation {
    #[error("article id {found} does not match hash of canonical url (expected {expected})")]
    IdMismatch { expected: ArticleId, found: ArticleId },
    #[error("article {0} has an empty body")]
    EmptyBody(ArticleId),
    #[error("frame distribution of article {id} sums to {sum}")]
    FrameSum { id: ArticleId, sum: f64 },
    #[error("propaganda index {index} of article {id} is outside [0, 1] or disagrees with its label")]
    Propaganda { id: ArticleId, index: f64 },
}

impl Article {
    /// Builds an unannotated article; the id is derived from `canonical_url`.
    pub fn new(
        canonical_url: Url,
        medium_id: MediumId,
        title: impl Into<String>,
        body: impl Into<String>,
        language: Language,
        published_at: DateTime<Utc>,
    ) -> Self {
        Article {
            id: ArticleId::for_url(&canonical_url),
            canonical_url,
            medium_id,
            title: title.into(),
            body: body.into(),
            language,
            published_at,
            section: None,
            propaganda: None,
            stances: BTreeMap::new(),
            frame_distribution: None,
        }
    }

    /// Checks the type invariants enforced on every store write.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let expected = ArticleId::for_url(&self.canonical_url);
        if expected != self.id {
            return Err(InvariantViolation::IdMismatch {
                expected,
                found: self.id.clone(),
            });
        }
        if self.body.trim().is_empty() {
            return Err(InvariantViolation::EmptyBody(self.id.clone()));
        }
        if let Some(frames) = &self.frame_distribution {
            let sum: f64 = frames.values().sum();
            if (sum - 1.0).abs() > 1e-9 || frames.values().any(|p| *p < 0.0) {
                return Err(InvariantViolation::FrameSum {
                    id: self.id.clone(),
                    sum,
                });
            }
        }
        if let Some(p) = &self.propaganda {
            let consistent = crate::classifiers::propaganda_label(p.index)
                .map(|label| label == p.label)
                .unwrap_or(false);
            if !consistent {
                return Err(InvariantViolation::Propaganda {
                    id: self.id.clone(),
                    index: p.index,
                });
            }
        }
        Ok(())
    }

    /// Title and body joined the way every text model sees them.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

/// A news outlet and the static metadata shown on its profile page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaSource {
    pub id: MediumId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homepage: Option<Url>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logo_url: Option<Url>,
    /// ISO-3166 alpha-2.
    pub country: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Optional static audience-reach fixture, displayed as-is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audience: Option<BTreeMap<String, f64>>,
}
