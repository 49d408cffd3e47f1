use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::graph::build_graph;
use super::louvain::louvain_restarts;
use super::merge::{Story, StoryBuilder, StoryId, Topic};
use super::terms::TermSpace;
use super::windows::{make_windows_from, window_anchor, Window};
use super::{ClusteringError, ClusteringParams};
use crate::model::{Article, ArticleId};
use crate::textproc::{preprocess, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub index: i64,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub articles: usize,
    pub edges: usize,
    pub communities: usize,
    pub modularity: f64,
    /// Closed windows are frozen; open ones are recomputed on every run.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOutcome {
    pub stories: Vec<Story>,
    pub topics: Vec<Topic>,
    /// Windows processed during this run.
    pub windows: Vec<WindowReport>,
}

impl ClusteringOutcome {
    pub fn assignment(&self) -> BTreeMap<ArticleId, StoryId> {
        self.stories
            .iter()
            .flat_map(|s| s.article_ids.iter().map(move |a| (a.clone(), s.id)))
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Entry {
    published_at: DateTime<Utc>,
    title: String,
    tokens: Vec<String>,
}

/// Incremental clustering over a growing article set.
///
/// Windows are anchored once, at the first run (or explicitly). On every run,
/// windows that ended before `now` are processed once and frozen; the windows
/// still open are recomputed on top of the frozen state and discarded
/// afterwards. Articles arriving after all of their windows were frozen are
/// reported as singleton stories.
#[derive(Debug, Clone)]
pub struct ClusteringJob {
    params: ClusteringParams,
    anchor: Option<DateTime<Utc>>,
    entries: BTreeMap<ArticleId, Entry>,
    order: Vec<ArticleId>,
    terms: TermSpace,
    frozen: StoryBuilder,
    closed_through: Option<i64>,
}

impl ClusteringJob {
    pub fn new(params: ClusteringParams) -> Result<Self, ClusteringError> {
        params.validate()?;
        Ok(ClusteringJob {
            terms: TermSpace::new(params.min_df),
            params,
            anchor: None,
            entries: BTreeMap::new(),
            order: Vec::new(),
            frozen: StoryBuilder::new(),
            closed_through: None,
        })
    }

    pub fn with_anchor(params: ClusteringParams, anchor: DateTime<Utc>) -> Result<Self, ClusteringError> {
        let mut job = Self::new(params)?;
        job.anchor = Some(window_anchor(anchor));
        Ok(job)
    }

    pub fn params(&self) -> &ClusteringParams {
        &self.params
    }

    pub fn anchor(&self) -> Option<DateTime<Utc>> {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns false if the article was already known.
    pub fn add_article(&mut self, article: &Article) -> bool {
        if self.entries.contains_key(&article.id) {
            return false;
        }
        let tokens = preprocess(&article.text(), article.language);
        self.terms.add_document(&tokens);
        self.order.push(article.id.clone());
        self.entries.insert(
            article.id.clone(),
            Entry {
                published_at: article.published_at,
                title: article.title.clone(),
                tokens,
            },
        );
        true
    }

    fn vector(&self, id: &ArticleId) -> SparseVector {
        self.terms.vector(&self.entries[id].tokens)
    }

    fn process_window(&self, window: &Window, builder: &mut StoryBuilder, closed: bool) -> WindowReport {
        let fresh: Vec<(ArticleId, SparseVector)> = window
            .article_ids
            .iter()
            .filter(|id| !builder.vectors().contains_key(*id))
            .map(|id| (id.clone(), self.vector(id)))
            .collect();
        builder.add_vectors(fresh);
        let mut graph = build_graph(&window.article_ids, builder.vectors(), self.params.t1);
        if !self.params.weighted {
            graph = graph.unweighted();
        }
        let result = louvain_restarts(&graph, self.params.seed, self.params.louvain_restarts);
        let n_comm = result.partition.iter().max().map_or(0, |c| c + 1);
        let mut communities: Vec<Vec<ArticleId>> = vec![Vec::new(); n_comm];
        for (id, c) in window.article_ids.iter().zip(&result.partition) {
            communities[*c].push(id.clone());
        }
        builder.add_window(&communities, (window.start, window.end));
        WindowReport {
            index: window.index,
            start: window.start,
            end: window.end,
            articles: window.article_ids.len(),
            edges: graph.edges().len(),
            communities: n_comm,
            modularity: result.modularity,
            closed,
        }
    }

    pub fn run(&mut self, now: DateTime<Utc>) -> ClusteringOutcome {
        let Some(earliest) = self.entries.values().map(|e| e.published_at).min() else {
            return ClusteringOutcome {
                stories: Vec::new(),
                topics: Vec::new(),
                windows: Vec::new(),
            };
        };
        let anchor = *self.anchor.get_or_insert_with(|| window_anchor(earliest));
        // arrival order must not matter, so a restarted job reproduces the stories
        let mut stamped: Vec<(ArticleId, DateTime<Utc>)> = self
            .order
            .iter()
            .map(|id| (id.clone(), self.entries[id].published_at))
            .collect();
        stamped.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        let windows = make_windows_from(anchor, &stamped, &self.params);

        let mut reports = Vec::new();
        let mut frozen = std::mem::take(&mut self.frozen);
        let closed_through = self.closed_through;
        for w in windows.iter().filter(|w| w.end <= now && closed_through.is_none_or(|c| w.index > c)) {
            reports.push(self.process_window(w, &mut frozen, true));
            self.closed_through = Some(w.index);
        }
        self.frozen = frozen;

        let mut scratch = self.frozen.clone();
        for w in windows.iter().filter(|w| w.end > now) {
            reports.push(self.process_window(w, &mut scratch, false));
        }

        let late: Vec<ArticleId> = stamped.iter().map(|(id, _)| id).filter(|id| !scratch.contains(id)).cloned().collect();
        for id in late {
            let t = self.entries[&id].published_at;
            scratch.add_vectors([(id.clone(), self.vector(&id))]);
            scratch.add_window(&[vec![id]], (t, t));
        }

        let mut stories = scratch.stories(self.params.t2);
        for s in stories.iter_mut() {
            s.title = self.entries[&s.representative].title.clone();
        }
        ClusteringOutcome {
            stories,
            topics: scratch.topics().to_vec(),
            windows: reports,
        }
    }
}

/// Batch clustering: every window is closed and processed in order.
pub fn cluster_articles(articles: &[Article], params: &ClusteringParams) -> Result<ClusteringOutcome, ClusteringError> {
    let mut job = ClusteringJob::new(params.clone())?;
    for a in articles {
        job.add_article(a);
    }
    Ok(job.run(DateTime::<Utc>::MAX_UTC))
}

/// Vectors the batch run would use, keyed by article id.
pub fn article_vectors(articles: &[Article], min_df: u32) -> HashMap<ArticleId, SparseVector> {
    let mut terms = TermSpace::new(min_df);
    let tokens: Vec<Vec<String>> = articles.iter().map(|a| preprocess(&a.text(), a.language)).collect();
    for t in &tokens {
        terms.add_document(t);
    }
    articles
        .iter()
        .zip(&tokens)
        .map(|(a, t)| (a.id.clone(), terms.vector(t)))
        .collect()
}
