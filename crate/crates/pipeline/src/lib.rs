//! The streaming side of newsdesk: an embedded durable queue, stages that
//! consume it with at-least-once delivery, and the periodic clustering and
//! profiling jobs.

pub mod config;
pub mod fetch;
pub mod queue;
pub mod replay;
pub mod runtime;
pub mod schedule;
pub mod stage;
pub mod stages;
pub mod topics;

pub use config::{Config, ConfigError};
pub use fetch::{FeedPoller, FetchConfig, FetchError, FetchRequest, Fetcher, FixtureFetcher, HttpFetcher};
pub use queue::{FileQueue, Message, Queue, QueueError};
pub use replay::{replay_documents, ReplayError, ReplayOutcome};
pub use runtime::{Pipeline, PipelineHandle, QueueOpener, RunReport};
pub use schedule::{ClusteringScheduler, Coalescer, OfflineInputs, OfflineJob, ScheduleError, Ticker};
pub use stage::{
    dead_letter_topic, json_handler, step, DeadLetter, FaultInjector, FaultPoint, Handler, KillOnce, StageDescriptor,
    StageFailure, StagePolicy, StepOutcome,
};
pub use stages::{article_stages, Analyzers, ArticleMessage, Clock, StageContext, TranslatedText};
