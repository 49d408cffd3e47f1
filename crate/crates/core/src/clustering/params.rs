use serde::{Deserialize, Serialize};

use super::ClusteringError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringParams {
    pub window_days: u32,
    pub window_overlap_days: u32,
    /// Minimum article cosine for an edge in a window graph (inclusive).
    pub t1: f64,
    /// Minimum topic-centroid cosine for two topics to join one story (inclusive).
    pub t2: f64,
    /// Louvain visit-order seed.
    pub seed: u64,
    /// Louvain runs per window (seeds `seed, seed + 1, …`); the highest-modularity partition wins.
    pub louvain_restarts: u32,
    /// Terms seen in fewer documents are left out of article vectors.
    pub min_df: u32,
    /// Use similarities as edge weights; `false` gives every edge weight 1.
    pub weighted: bool,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        ClusteringParams {
            window_days: 6,
            window_overlap_days: 3,
            t1: 0.31,
            t2: 0.8,
            seed: 0,
            louvain_restarts: 4,
            min_df: 2,
            weighted: true,
        }
    }
}

impl ClusteringParams {
    pub fn step_days(&self) -> u32 {
        self.window_days - self.window_overlap_days
    }

    pub fn validate(&self) -> Result<(), ClusteringError> {
        let fail = |m: &str| Err(ClusteringError::InvalidParams(m.to_owned()));
        if self.window_overlap_days == 0 || self.window_overlap_days >= self.window_days {
            return fail("window overlap must satisfy 0 < overlap < window_days");
        }
        if self.louvain_restarts == 0 {
            return fail("louvain_restarts must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.t1) || !(0.0..=1.0).contains(&self.t2) {
            return fail("t1 and t2 must lie in [0, 1]");
        }
        Ok(())
    }
}
