//! Story detection: per-window similarity graphs partitioned by Louvain,
//! windows chained into topics through shared articles, and topics merged
//! into stories by centroid similarity. Also the clustering quality metrics.

mod graph;
mod job;
mod louvain;
mod merge;
mod metrics;
mod params;
mod terms;
mod windows;

pub use graph::{build_graph, SimilarityGraph};
pub use job::{article_vectors, cluster_articles, ClusteringJob, ClusteringOutcome, WindowReport};
pub use louvain::{louvain, louvain_restarts, modularity, LouvainResult};
pub use merge::{merge_topics, merge_windows, Story, StoryBuilder, StoryId, Topic, TopicId};
pub use metrics::{bcubed_f1, pairwise_f1, Scores};
pub use params::ClusteringParams;
pub use terms::{term_index, TermSpace};
pub use windows::{make_windows, make_windows_from, window_anchor, window_bounds, windows_containing, Window};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusteringError {
    #[error("invalid clustering parameters: {0}")]
    InvalidParams(String),
    #[error("predicted and gold partitions cover different items")]
    PartitionMismatch,
}
