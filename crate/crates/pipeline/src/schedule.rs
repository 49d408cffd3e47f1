//! Periodic jobs: story clustering (every 30 minutes by default) and the
//! offline aggregation (daily), each publishing its result atomically.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use newsdesk_core::classifiers::{medium_features, SourceClassifier, SourceLabels, TrainConfig};
use newsdesk_core::clustering::{ClusteringError, ClusteringJob, ClusteringParams};
use newsdesk_core::ingest::{ArticleStore, StoreError};
use newsdesk_core::profiles::{
    build_all_profiles, build_topic_stats, CitationTable, Claim, ProfileConfig, ProfileError, ProfileInputs, TopicDef,
};
use newsdesk_core::publish::{
    read_json_or_default, write_json_atomic, PublishedProfiles, PublishedStories, PROFILES_FILE, STORIES_FILE,
};
use newsdesk_core::{ArticleId, MediaSource, MediumId};

use crate::queue::{Queue, QueueError};
use crate::topics::{ANNOTATED, CLUSTERING_GROUP};

#[derive(Debug, thiserror::Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Lets at most one run through at a time; a run requested while another is
/// in progress is dropped and counted.
#[derive(Debug, Default)]
pub struct Coalescer {
    running: AtomicBool,
    coalesced: AtomicU64,
}

impl Coalescer {
    pub fn try_run<T>(&self, f: impl FnOnce() -> T) -> Option<T> {
        if self.running.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).is_err() {
            self.coalesced.fetch_add(1, Ordering::Relaxed);
            return None;
        }
        struct Release<'a>(&'a AtomicBool);
        impl Drop for Release<'_> {
            fn drop(&mut self) {
                self.0.store(false, Ordering::Release);
            }
        }
        let _release = Release(&self.running);
        Some(f())
    }

    pub fn coalesced(&self) -> u64 {
        self.coalesced.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringTick {
    pub new_articles: usize,
    pub stories: usize,
}

/// Owns the streaming clustering state; each tick feeds it the articles
/// annotated since the previous tick and publishes the stories.
pub struct ClusteringScheduler {
    job: Mutex<ClusteringJob>,
    gate: Coalescer,
    store: Arc<dyn ArticleStore>,
    publish_dir: PathBuf,
}

impl ClusteringScheduler {
    /// Seeds the job with every stored article, so a restarted process
    /// picks up where the published stories left off.
    pub fn new(
        params: ClusteringParams,
        store: Arc<dyn ArticleStore>,
        publish_dir: impl Into<PathBuf>,
    ) -> Result<Self, ScheduleError> {
        let mut job = ClusteringJob::new(params)?;
        for a in store.snapshot()? {
            job.add_article(&a);
        }
        Ok(ClusteringScheduler {
            job: Mutex::new(job),
            gate: Coalescer::default(),
            store,
            publish_dir: publish_dir.into(),
        })
    }

    pub fn coalesced(&self) -> u64 {
        self.gate.coalesced()
    }

    /// Runs one clustering batch, or returns `None` when a batch is
    /// already running.
    pub fn tick(&self, queue: &dyn Queue, now: DateTime<Utc>) -> Option<Result<ClusteringTick, ScheduleError>> {
        self.gate.try_run(|| self.run(queue, now))
    }

    fn run(&self, queue: &dyn Queue, now: DateTime<Utc>) -> Result<ClusteringTick, ScheduleError> {
        queue.create_topic(ANNOTATED)?;
        let end = queue.end_offset(ANNOTATED)?;
        let mut at = queue.committed(CLUSTERING_GROUP, ANNOTATED)?;
        let mut job = self.job.lock().unwrap();
        let mut new_articles = 0;
        while at < end {
            let batch = queue.read(ANNOTATED, at, 512)?;
            for m in batch.iter().take_while(|m| m.offset < end) {
                at = m.offset + 1;
                let Ok(id) = serde_json::from_slice::<ArticleId>(&m.payload) else {
                    log::warn!("clustering: skipping undecodable id at offset {}", m.offset);
                    continue;
                };
                if let Some(a) = self.store.get(&id)? {
                    new_articles += usize::from(job.add_article(&a));
                }
            }
        }
        let outcome = job.run(now);
        let published = PublishedStories {
            generated_at: Some(now),
            stories: outcome.stories,
        };
        write_json_atomic(&self.publish_dir.join(STORIES_FILE), &published)?;
        queue.commit(CLUSTERING_GROUP, ANNOTATED, end)?;
        Ok(ClusteringTick {
            new_articles,
            stories: published.stories.len(),
        })
    }
}

/// Inputs of the offline aggregation that do not change between runs.
#[derive(Debug, Clone, Default)]
pub struct OfflineInputs {
    pub media: BTreeMap<MediumId, MediaSource>,
    pub claims: Vec<Claim>,
    pub topics: BTreeMap<String, TopicDef>,
    pub citations: CitationTable,
    pub labels: BTreeMap<MediumId, SourceLabels>,
    pub profile: ProfileConfig,
    pub train: TrainConfig,
}

/// Builds media profiles and topic statistics from the store and the
/// published stories, and swaps `profiles.json` in one rename.
pub struct OfflineJob {
    inputs: OfflineInputs,
    store: Arc<dyn ArticleStore>,
    publish_dir: PathBuf,
    gate: Coalescer,
}

impl OfflineJob {
    pub fn new(inputs: OfflineInputs, store: Arc<dyn ArticleStore>, publish_dir: impl Into<PathBuf>) -> Self {
        OfflineJob {
            inputs,
            store,
            publish_dir: publish_dir.into(),
            gate: Coalescer::default(),
        }
    }

    pub fn tick(&self, now: DateTime<Utc>) -> Option<Result<PublishedProfiles, ScheduleError>> {
        self.gate.try_run(|| self.run(now))
    }

    fn run(&self, now: DateTime<Utc>) -> Result<PublishedProfiles, ScheduleError> {
        let articles = self.store.snapshot()?;
        let stories: PublishedStories = read_json_or_default(&self.publish_dir.join(STORIES_FILE))?;

        // the source classifier is refit on the operator-labelled media each run
        let mut features = BTreeMap::new();
        for id in self.inputs.media.keys() {
            let own: Vec<_> = articles.iter().filter(|a| &a.medium_id == id).collect();
            if !own.is_empty() {
                features.insert(id.clone(), medium_features(own));
            }
        }
        let classifier = SourceClassifier::train(&features, &self.inputs.labels, &self.inputs.train)
            .map_err(ProfileError::from)?;
        let has_model = classifier.factuality.is_some() || classifier.bias.is_some();

        let inputs = ProfileInputs {
            media: &self.inputs.media,
            claims: &self.inputs.claims,
            citations: &self.inputs.citations,
            labels: &self.inputs.labels,
            classifier: has_model.then_some(&classifier),
            config: &self.inputs.profile,
        };
        let profiles = build_all_profiles(&articles, &inputs)?;
        let by_id = articles.into_iter().map(|a| (a.id.clone(), a)).collect();
        let topics = self
            .inputs
            .topics
            .keys()
            .map(|slug| {
                let stats = build_topic_stats(slug, &self.inputs.topics, &stories.stories, &by_id, &self.inputs.media)?;
                Ok((slug.clone(), stats))
            })
            .collect::<Result<_, ProfileError>>()?;
        let published = PublishedProfiles {
            generated_at: Some(now),
            media: self.inputs.media.clone(),
            profiles,
            topic_defs: self.inputs.topics.clone(),
            topics,
            claims: self.inputs.claims.clone(),
        };
        write_json_atomic(&self.publish_dir.join(PROFILES_FILE), &published)?;
        Ok(published)
    }
}

/// A background thread calling `job` every `every`. Ticks missed while a run
/// overran are collapsed into one.
pub struct Ticker {
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl Ticker {
    pub fn spawn(name: &str, every: Duration, mut job: impl FnMut() + Send + 'static) -> Ticker {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let thread = std::thread::Builder::new()
            .name(name.to_owned())
            .spawn(move || {
                let mut next = Instant::now();
                while !flag.load(Ordering::Relaxed) {
                    let now = Instant::now();
                    if now < next {
                        std::thread::sleep((next - now).min(Duration::from_millis(200)));
                        continue;
                    }
                    job();
                    next += every;
                    let after = Instant::now();
                    if next <= after {
                        let skipped = ((after - next).as_secs_f64() / every.as_secs_f64()).floor() as u32 + 1;
                        log::info!("coalescing {skipped} missed tick(s)");
                        next += every * skipped;
                    }
                }
            })
            .expect("spawn ticker");
        Ticker {
            stop,
            thread: Some(thread),
        }
    }

    pub fn stop(mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Barrier;

    #[test]
    fn coalescer_admits_one_run_at_a_time() {
        let gate = Arc::new(Coalescer::default());
        let inside = Arc::new(Barrier::new(2));
        let release = Arc::new(Barrier::new(2));
        let g = gate.clone();
        let (i, r) = (inside.clone(), release.clone());
        let t = std::thread::spawn(move || {
            g.try_run(|| {
                i.wait();
                r.wait();
            })
        });
        inside.wait();
        assert!(gate.try_run(|| ()).is_none());
        release.wait();
        assert!(t.join().unwrap().is_some());
        assert!(gate.try_run(|| ()).is_some());
        assert_eq!(gate.coalesced(), 1);
    }

    #[test]
    fn ticker_runs_and_stops() {
        let count = Arc::new(AtomicU64::new(0));
        let c = count.clone();
        let t = Ticker::spawn("test", Duration::from_millis(20), move || {
            c.fetch_add(1, Ordering::Relaxed);
        });
        std::thread::sleep(Duration::from_millis(150));
        t.stop();
        let n = count.load(Ordering::Relaxed);
        assert!((2..=10).contains(&n), "{n}");
    }
}
