//! Wiring from a [`Config`] to the running pieces: store, queue, stages,
//! scheduled jobs and the API snapshot.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use chrono::Utc;
use newsdesk_api::Snapshot;
use newsdesk_core::classifiers::{read_source_labels, LinearModel, StanceClassifier};
use newsdesk_core::ingest::{ArticleStore, ParagraphBlockExtractor, SourcesConfig, SqliteStore};
use newsdesk_core::profiles::{read_claims, read_topics, CitationTable, Claim};
use newsdesk_pipeline::{
    article_stages, Analyzers, Config, FileQueue, HttpFetcher, OfflineInputs, Pipeline, Queue, QueueOpener,
    StageContext,
};

pub fn open_store(config: &Config) -> Result<Arc<dyn ArticleStore>> {
    let path = &config.store.path;
    let store = if path.as_os_str() == ":memory:" {
        SqliteStore::in_memory()?
    } else {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        SqliteStore::open(path).with_context(|| format!("opening store {}", path.display()))?
    };
    Ok(Arc::new(store))
}

/// Opens the queue once and hands the same instance to every caller. A
/// `FileQueue` does not see appends made through another instance, so the
/// stages, the feed poller and the clustering scheduler of one process must
/// share it.
pub fn shared_queue(config: &Config) -> Result<(Arc<dyn Queue>, QueueOpener)> {
    let queue: Arc<dyn Queue> = Arc::new(FileQueue::open(&config.queue.dir)?);
    let handle = queue.clone();
    Ok((queue, Arc::new(move || Ok(handle.clone()))))
}

pub fn load_sources(config: &Config) -> Result<SourcesConfig> {
    match &config.sources.path {
        None => Ok(SourcesConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(SourcesConfig::parse(&text, p)?)
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

pub fn load_claims(config: &Config) -> Result<Vec<Claim>> {
    match &config.registry.claims {
        None => Ok(Vec::new()),
        Some(p) => Ok(read_claims(open(p)?).with_context(|| format!("reading {}", p.display()))?),
    }
}

fn load_model(path: &Option<std::path::PathBuf>) -> Result<Option<LinearModel>> {
    path.as_ref()
        .map(|p| LinearModel::load(p).with_context(|| format!("loading model {}", p.display())))
        .transpose()
}

pub fn analyzers(config: &Config) -> Result<Analyzers> {
    Ok(Analyzers {
        section: load_model(&config.models.section)?,
        propaganda: load_model(&config.models.propaganda)?,
        stance: StanceClassifier::baseline(config.models.stance.clone()),
        claims: load_claims(config)?,
        ..Analyzers::default()
    })
}

pub fn stage_context(config: &Config, store: Arc<dyn ArticleStore>, sources: &SourcesConfig) -> Result<StageContext> {
    Ok(StageContext {
        store,
        extractor: Arc::new(ParagraphBlockExtractor),
        feeds: Arc::new(sources.feeds_by_id()),
        fetcher: Arc::new(HttpFetcher::new(&config.fetch)?),
        analyzers: Arc::new(analyzers(config)?),
        clock: Arc::new(Utc::now),
    })
}

pub fn build_pipeline(config: &Config, ctx: &StageContext, queue: QueueOpener) -> Result<Pipeline> {
    let stages = article_stages(ctx, &config.stages.parallelism);
    Ok(Pipeline::new(queue, stages, config.stages.policy())?)
}

pub fn offline_inputs(config: &Config, sources: &SourcesConfig) -> Result<OfflineInputs> {
    let r = &config.registry;
    Ok(OfflineInputs {
        media: sources.media.iter().map(|m| (m.id.clone(), m.clone())).collect(),
        claims: load_claims(config)?,
        topics: match &r.topics {
            None => BTreeMap::new(),
            Some(p) => read_topics(open(p)?).with_context(|| format!("reading {}", p.display()))?,
        },
        citations: match &r.citations {
            None => CitationTable::default(),
            Some(p) => CitationTable::read_csv(open(p)?).with_context(|| format!("reading {}", p.display()))?,
        },
        labels: match &r.labels {
            None => BTreeMap::new(),
            Some(p) => read_source_labels(open(p)?).with_context(|| format!("reading {}", p.display()))?,
        },
        profile: config.profiles.clone(),
        train: config.models.train.clone(),
    })
}

pub fn load_snapshot(config: &Config, store: &dyn ArticleStore) -> Result<Snapshot> {
    Ok(Snapshot::load(store, &config.publish.dir)?)
}
