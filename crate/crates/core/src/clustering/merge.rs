use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::ArticleId;
use crate::textproc::{centroid, cosine, SparseVector};

pub type TopicId = u64;
pub type StoryId = u64;

/// Articles linked across windows, with their normalized mean vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: TopicId,
    pub article_ids: BTreeSet<ArticleId>,
    pub centroid: SparseVector,
    pub window_span: (DateTime<Utc>, DateTime<Utc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Story {
    /// Smallest member topic id.
    pub id: StoryId,
    pub topic_ids: BTreeSet<TopicId>,
    pub article_ids: BTreeSet<ArticleId>,
    /// Member article closest to the story centroid (ties: smallest id).
    pub representative: ArticleId,
    pub title: String,
}

/// Folds the communities of one window into the running topic list.
///
/// Communities are handled in order. A community sharing no article with an
/// existing topic becomes a new topic numbered from `next_id`; otherwise it is
/// unioned into the lowest-numbered topic it touches, and every other topic it
/// touches is merged there too. Centroids of changed topics are recomputed
/// from `vectors`.
pub fn merge_windows(
    prev_topics: Vec<Topic>,
    communities: &[Vec<ArticleId>],
    span: (DateTime<Utc>, DateTime<Utc>),
    vectors: &HashMap<ArticleId, SparseVector>,
    next_id: &mut TopicId,
) -> Vec<Topic> {
    let mut topics: BTreeMap<TopicId, Topic> = prev_topics.into_iter().map(|t| (t.id, t)).collect();
    let mut owner: HashMap<ArticleId, TopicId> = HashMap::new();
    for t in topics.values() {
        for a in &t.article_ids {
            owner.insert(a.clone(), t.id);
        }
    }
    let mut changed: BTreeSet<TopicId> = BTreeSet::new();

    for community in communities {
        let touching: BTreeSet<TopicId> = community.iter().filter_map(|a| owner.get(a).copied()).collect();
        let target = match touching.first() {
            Some(id) => *id,
            None => {
                let id = *next_id;
                *next_id += 1;
                topics.insert(
                    id,
                    Topic {
                        id,
                        article_ids: BTreeSet::new(),
                        centroid: SparseVector::new(),
                        window_span: span,
                    },
                );
                id
            }
        };
        for other in touching.iter().skip(1) {
            let absorbed = topics.remove(other).expect("owner index out of sync");
            changed.remove(other);
            let t = topics.get_mut(&target).unwrap();
            for a in absorbed.article_ids {
                owner.insert(a.clone(), target);
                t.article_ids.insert(a);
            }
            t.window_span = (t.window_span.0.min(absorbed.window_span.0), t.window_span.1.max(absorbed.window_span.1));
        }
        let t = topics.get_mut(&target).unwrap();
        for a in community {
            owner.insert(a.clone(), target);
            t.article_ids.insert(a.clone());
        }
        t.window_span = (t.window_span.0.min(span.0), t.window_span.1.max(span.1));
        changed.insert(target);
    }

    for id in changed {
        let t = topics.get_mut(&id).unwrap();
        t.centroid = topic_centroid(&t.article_ids, vectors);
    }
    topics.into_values().collect()
}

fn topic_centroid(members: &BTreeSet<ArticleId>, vectors: &HashMap<ArticleId, SparseVector>) -> SparseVector {
    centroid(members.iter().filter_map(|a| vectors.get(a)))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the meta-graph whose edges join topics with
/// centroid cosine ≥ `t2`. Titles are left empty for the caller to fill.
pub fn merge_topics(topics: &[Topic], t2: f64, vectors: &HashMap<ArticleId, SparseVector>) -> Vec<Story> {
    let n = topics.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..n).filter_map(move |j| (cosine(&topics[i].centroid, &topics[j].centroid) >= t2).then_some((i, j)))
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<&Topic>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(&topics[i]);
    }
    let mut stories: Vec<Story> = groups
        .into_values()
        .map(|members| {
            let topic_ids: BTreeSet<TopicId> = members.iter().map(|t| t.id).collect();
            let article_ids: BTreeSet<ArticleId> = members.iter().flat_map(|t| t.article_ids.iter().cloned()).collect();
            let center = topic_centroid(&article_ids, vectors);
            let mut representative = article_ids.first().cloned().expect("topics are non-empty");
            let mut best = f64::NEG_INFINITY;
            for a in &article_ids {
                let sim = vectors.get(a).map_or(0.0, |v| cosine(v, &center));
                if sim > best {
                    best = sim;
                    representative = a.clone();
                }
            }
            Story {
                id: *topic_ids.first().unwrap(),
                topic_ids,
                article_ids,
                representative,
                title: String::new(),
            }
        })
        .collect();
    stories.sort_by_key(|s| s.id);
    stories
}

/// Running window-merge state: feed windows in chronological order.
#[derive(Debug, Clone, Default)]
pub struct StoryBuilder {
    topics: Vec<Topic>,
    next_id: TopicId,
    vectors: HashMap<ArticleId, SparseVector>,
}

impl StoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    pub fn vectors(&self) -> &HashMap<ArticleId, SparseVector> {
        &self.vectors
    }

    pub fn contains(&self, article: &ArticleId) -> bool {
        self.topics.iter().any(|t| t.article_ids.contains(article))
    }

    /// Records vectors for articles not seen before; existing ones are kept.
    pub fn add_vectors(&mut self, vectors: impl IntoIterator<Item = (ArticleId, SparseVector)>) {
        for (id, v) in vectors {
            self.vectors.entry(id).or_insert(v);
        }
    }

    pub fn add_window(&mut self, communities: &[Vec<ArticleId>], span: (DateTime<Utc>, DateTime<Utc>)) {
        let prev = std::mem::take(&mut self.topics);
        self.topics = merge_windows(prev, communities, span, &self.vectors, &mut self.next_id);
    }

    pub fn stories(&self, t2: f64) -> Vec<Story> {
        merge_topics(&self.topics, t2, &self.vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn id(s: &str) -> ArticleId {
        ArticleId::from(s)
    }

    fn span(day: i64) -> (DateTime<Utc>, DateTime<Utc>) {
        let start = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::days(day);
        (start, start + chrono::Duration::days(6))
    }

    fn vectors(entries: &[(&str, &[f64])]) -> HashMap<ArticleId, SparseVector> {
        entries
            .iter()
            .map(|(k, v)| (id(k), SparseVector::from_dense(v).normalized()))
            .collect()
    }

    #[test]
    fn shared_article_links_windows_and_bridges_topics() {
        let vecs = vectors(&[("a", &[1.0]), ("b", &[1.0]), ("c", &[0.0, 1.0]), ("d", &[0.0, 1.0]), ("e", &[1.0, 1.0])]);
        let mut next = 0;
        let t = merge_windows(Vec::new(), &[vec![id("a"), id("b")], vec![id("c")]], span(0), &vecs, &mut next);
        assert_eq!(t.len(), 2);
        assert_eq!(next, 2);
        // next window: one community containing b and c bridges both topics
        let t = merge_windows(t, &[vec![id("b"), id("c"), id("e")], vec![id("d")]], span(3), &vecs, &mut next);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].id, 0);
        assert_eq!(t[0].article_ids.len(), 4);
        assert_eq!(t[0].window_span, (span(0).0, span(3).1));
        assert_eq!(t[1].id, 2);
        assert!((t[0].centroid.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn topic_merging_threshold() {
        let mk = |tid: u64, art: &str, v: &[f64]| Topic {
            id: tid,
            article_ids: [id(art)].into_iter().collect(),
            centroid: SparseVector::from_dense(v).normalized(),
            window_span: span(0),
        };
        let vecs = HashMap::new();
        let same = [mk(0, "a", &[1.0, 0.0]), mk(1, "b", &[1.0, 0.0])];
        assert_eq!(merge_topics(&same, 0.8, &vecs).len(), 1);
        // cos = 0.79
        let y = (1.0f64 - 0.79 * 0.79).sqrt();
        let apart = [mk(0, "a", &[1.0, 0.0]), mk(1, "b", &[0.79, y])];
        assert_eq!(merge_topics(&apart, 0.8, &vecs).len(), 2);
        let single = [mk(4, "a", &[1.0])];
        let s = merge_topics(&single, 0.8, &vecs);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, 4);
    }

    #[test]
    fn incremental_equals_from_scratch() {
        let vecs = vectors(&[("a", &[1.0]), ("b", &[1.0, 0.2]), ("c", &[0.0, 1.0]), ("d", &[0.3, 1.0])]);
        let windows: Vec<(Vec<Vec<ArticleId>>, _)> = vec![
            (vec![vec![id("a"), id("b")]], span(0)),
            (vec![vec![id("b")], vec![id("c"), id("d")]], span(3)),
            (vec![vec![id("d")]], span(6)),
        ];
        let mut incremental = StoryBuilder::new();
        incremental.add_vectors(vecs.clone());
        let mut snapshots = Vec::new();
        for (c, s) in &windows {
            incremental.add_window(c, *s);
            snapshots.push(incremental.topics().to_vec());
        }
        for k in 1..=windows.len() {
            let mut scratch = StoryBuilder::new();
            scratch.add_vectors(vecs.clone());
            for (c, s) in &windows[..k] {
                scratch.add_window(c, *s);
            }
            assert_eq!(scratch.topics(), snapshots[k - 1].as_slice());
        }
    }
}
