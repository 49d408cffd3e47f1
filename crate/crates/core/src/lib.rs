//! Core of the newsdesk aggregator: ingestion, text processing, article
//! classifiers, two-stage story clustering and offline media/topic profiles.

pub mod classifiers;
pub mod clustering;
pub mod hash;
pub mod ingest;
pub mod model;
pub mod profiles;
pub mod publish;
pub mod synthetic;
pub mod textproc;

pub use model::{
    Article, ArticleId, Bias, ClaimId, Factuality, FrameLabel, Language, MediaSource, MediumId,
    PropagandaLabel, PropagandaResult, SectionLabel, StanceLabel,
};
