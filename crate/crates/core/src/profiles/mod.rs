//! Offline aggregation: per-medium profiles (propaganda and frame
//! distributions, stance per claim, factuality and bias, citation valence per
//! topic) and per-topic coverage statistics.

mod citations;
mod media;
mod registry;
mod topics;
mod valence;

pub use citations::{CitationRow, CitationTable, UserGroup};
pub use media::{
    build_all_profiles, build_media_profile, frame_distribution, propaganda_distribution, ClaimStance, LabelSource,
    MediaProfile, ProfileConfig, ProfileInputs,
};
pub use registry::{read_claims, read_topics, Claim, TopicDef, TopicMatcher};
pub use topics::{build_topic_stats, CountryCoverage, MediumCoverage, TopicStats, TopicTotals, UNKNOWN_COUNTRY};
pub use valence::{valence, valence_label, GroupCitationCounts, Orientation, ValenceLabel, ValenceRecord};

use crate::classifiers::ClassifierError;
use crate::model::MediumId;

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("valence of {medium_id} on `{topic_id}` is undefined: a group total is zero or neither group cites it")]
    UndefinedValence { medium_id: MediumId, topic_id: String },
    #[error("invalid citation counts: {0}")]
    InvalidCounts(String),
    #[error("valence {0} is outside [-1, 1]")]
    Range(f64),
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}
