//! Feed parsing, article extraction, de-duplication and persistence.

mod canonical;
mod dedup;
mod extract;
mod feed;
mod sources;
mod store;
mod translate;

use std::collections::HashMap;

pub use canonical::{canonicalize_url, resolve_link};
pub use dedup::{content_fingerprint, dedup_key, normalize_for_fingerprint, DedupKey};
pub use extract::{ContentExtractor, ExtractError, Extracted, ParagraphBlockExtractor, RawDocument};
pub use feed::{parse_date, parse_feed, FeedEntry, FeedKind};
pub use sources::{FeedRegistry, FeedSource, SourcesConfig, SourcesError, MIN_POLL_INTERVAL_SECS};
pub use store::{
    apply_annotation, export_jsonl, import_jsonl, Annotation, ArticleStore, InsertOutcome, MemoryStore,
    SqliteStore, StoreError,
};
pub use translate::{IdentityTranslator, Translation, Translator};

use crate::model::Article;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("malformed feed at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("unsupported feed kind `{0}`")]
    UnsupportedKind(String),
    #[error("invalid url `{url}`: {reason}")]
    InvalidUrl { url: String, reason: String },
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

#[derive(Debug, Default)]
pub struct IngestReport {
    /// Articles inserted by this batch, in input order.
    pub new_articles: Vec<Article>,
    pub duplicates: usize,
    /// Documents that could not be turned into articles; the batch carried on.
    pub errors: Vec<IngestError>,
}

/// Turns fetched documents into stored articles.
pub struct Ingestor<'a> {
    pub extractor: &'a dyn ContentExtractor,
    pub store: &'a dyn ArticleStore,
    pub sources: &'a HashMap<String, FeedSource>,
}

impl Ingestor<'_> {
    /// Builds the article a raw document would become, without storing it.
    pub fn prepare(&self, doc: &RawDocument) -> Result<Article, IngestError> {
        let source = self.sources.get(&doc.source_id).ok_or_else(|| ExtractError {
            url: doc.fetch_url.to_string(),
            reason: format!("unknown source `{}`", doc.source_id),
        })?;
        let extracted = self.extractor.extract(doc)?;
        let url = extracted.canonical_url.as_ref().unwrap_or(&doc.fetch_url);
        let canonical = canonicalize_url(url.as_str())?;
        let published_at = extracted
            .published_at
            .or(doc.feed_published_at)
            .unwrap_or(doc.fetched_at);
        Ok(Article::new(
            canonical,
            source.medium_id.clone(),
            extracted.title,
            extracted.body,
            source.language,
            published_at,
        ))
    }

    /// Extracts, de-duplicates against the store and persists. Only newly
    /// inserted articles are returned, so re-delivering a batch yields nothing.
    pub fn ingest_batch(&self, docs: &[RawDocument]) -> Result<IngestReport, StoreError> {
        let mut report = IngestReport::default();
        for doc in docs {
            let article = match self.prepare(doc) {
                Ok(a) => a,
                Err(e) => {
                    log::warn!("skipping {}: {e}", doc.fetch_url);
                    report.errors.push(e);
                    continue;
                }
            };
            match self.store.insert_if_absent(&article)? {
                InsertOutcome::Inserted => report.new_articles.push(article),
                InsertOutcome::Duplicate(_) => report.duplicates += 1,
            }
        }
        Ok(report)
    }
}
