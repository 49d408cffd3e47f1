//! Replays a log of raw documents through the article stages, optionally
//! under fault injection, and reports the resulting store.

use std::path::Path;
use std::sync::Arc;

use newsdesk_core::ingest::{export_jsonl, ArticleStore, RawDocument};

use crate::queue::{FileQueue, Queue, QueueError};
use crate::runtime::{Pipeline, QueueOpener, RunReport};
use crate::stage::{FaultInjector, StagePolicy};
use crate::stages::{article_stages, StageContext};
use crate::topics;

#[derive(Debug)]
pub struct ReplayOutcome {
    pub report: RunReport,
    /// The store exported as JSON Lines, articles ordered by id.
    pub export: Vec<u8>,
    pub articles: usize,
    /// Messages sitting in dead-letter topics.
    pub dead_letters: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Store(#[from] newsdesk_core::ingest::StoreError),
}

/// Publishes `docs` to the raw-document topic of a fresh queue in
/// `queue_dir` and runs every stage until idle.
pub fn replay_documents(
    queue_dir: &Path,
    docs: &[RawDocument],
    ctx: &StageContext,
    policy: StagePolicy,
    faults: Option<Arc<dyn FaultInjector>>,
) -> Result<ReplayOutcome, ReplayError> {
    let dir = queue_dir.to_owned();
    let opener: QueueOpener = Arc::new(move || Ok(Arc::new(FileQueue::open(&dir)?) as Arc<dyn Queue>));
    let stages = article_stages(ctx, &Default::default());
    let mut pipeline = Pipeline::new(opener, stages, policy)?;
    {
        let queue = pipeline.queue();
        for doc in docs {
            let payload = serde_json::to_vec(doc).expect("raw document serializes");
            queue.publish(topics::RAW_DOCUMENTS, &payload)?;
        }
        queue.sync(topics::RAW_DOCUMENTS)?;
    }
    if let Some(f) = faults {
        pipeline = pipeline.with_faults(f);
    }
    let report = pipeline.run_until_idle()?;
    let queue = pipeline.queue();
    let mut dead_letters = 0;
    for s in pipeline.stages() {
        dead_letters += queue.end_offset(&crate::stage::dead_letter_topic(&s.name))?;
    }
    Ok(ReplayOutcome {
        report,
        export: export_store(ctx.store.as_ref())?,
        articles: ctx.store.len()?,
        dead_letters,
    })
}

pub fn export_store(store: &dyn ArticleStore) -> Result<Vec<u8>, ReplayError> {
    let mut out = Vec::new();
    export_jsonl(store, &mut out)?;
    Ok(out)
}

/// Raw documents for the synthetic story corpus (one feed per medium), with
/// `redeliveries` documents sent twice and `mirrors` documents re-published
/// under another URL. Returns the log and the feeds it refers to.
pub fn synthetic_documents(
    topics: usize,
    per_topic: usize,
    redeliveries: usize,
    mirrors: usize,
    seed: u64,
) -> (Vec<RawDocument>, std::collections::HashMap<String, newsdesk_core::ingest::FeedSource>) {
    use newsdesk_core::ingest::{FeedKind, FeedSource};
    use newsdesk_core::synthetic::story_corpus;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let corpus = story_corpus(topics, per_topic, 12, seed);
    let mut feeds = std::collections::HashMap::new();
    let mut docs: Vec<RawDocument> = corpus
        .iter()
        .map(|(a, _)| {
            let source_id = format!("feed-{}", a.medium_id);
            feeds.entry(source_id.clone()).or_insert_with(|| FeedSource {
                id: source_id.clone(),
                medium_id: a.medium_id.clone(),
                kind: FeedKind::Rss,
                url: url::Url::parse(&format!("https://{}.example/rss", a.medium_id)).unwrap(),
                poll_interval: 300,
                country: "US".into(),
                language: a.language,
            });
            RawDocument {
                fetch_url: a.canonical_url.clone(),
                fetched_at: a.published_at,
                body_html: format!(
                    "<html><head><title>{}</title></head><body><article><p>{}</p></article></body></html>",
                    a.title, a.body
                ),
                source_id,
                feed_title: Some(a.title.clone()),
                feed_published_at: Some(a.published_at),
            }
        })
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let picked: Vec<RawDocument> = docs.choose_multiple(&mut rng, redeliveries + mirrors).cloned().collect();
    for (i, mut doc) in picked.into_iter().enumerate() {
        if i >= redeliveries {
            doc.fetch_url = url::Url::parse(&format!("https://mirror.example/copy/{i}")).unwrap();
        }
        docs.push(doc);
    }
    // interleave the extra deliveries with the originals
    docs.shuffle(&mut rng);
    (docs, feeds)
}
