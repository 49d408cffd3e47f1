//! Name/slug search over media and topics.

use serde::{Deserialize, Serialize};

use crate::snapshot::Snapshot;

pub const MAX_RESULTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchType {
    Media,
    Topics,
}

/// How a candidate matched, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Prefix,
    WordPrefix,
    Substring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    #[serde(rename = "type")]
    pub kind: SearchType,
    pub id: String,
    pub name: String,
    #[serde(rename = "match")]
    pub matched: MatchKind,
}

/// Case-insensitive match of `query` (already lowercased) against one field.
fn match_field(query: &str, field: &str) -> Option<MatchKind> {
    let field = field.to_lowercase();
    if field == query {
        Some(MatchKind::Exact)
    } else if field.starts_with(query) {
        Some(MatchKind::Prefix)
    } else if field
        .split(|c: char| !c.is_alphanumeric())
        .skip(1)
        .any(|w| w.starts_with(query))
    {
        Some(MatchKind::WordPrefix)
    } else if field.contains(query) {
        Some(MatchKind::Substring)
    } else {
        None
    }
}

fn best(query: &str, id: &str, name: &str) -> Option<MatchKind> {
    match (match_field(query, id), match_field(query, name)) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Hits ordered by match kind, then name, then id.
pub fn search(snap: &Snapshot, query: &str, kind: Option<SearchType>) -> Vec<SearchHit> {
    let q = query.trim().to_lowercase();
    let mut hits = Vec::new();
    if kind.is_none_or(|k| k == SearchType::Media) {
        for (id, m) in snap.media() {
            if let Some(matched) = best(&q, id.as_str(), &m.name) {
                hits.push(SearchHit {
                    kind: SearchType::Media,
                    id: id.as_str().to_owned(),
                    name: m.name.clone(),
                    matched,
                });
            }
        }
    }
    if kind.is_none_or(|k| k == SearchType::Topics) {
        for (slug, t) in snap.topic_defs() {
            if let Some(matched) = best(&q, slug, &t.name) {
                hits.push(SearchHit {
                    kind: SearchType::Topics,
                    id: slug.clone(),
                    name: t.name.clone(),
                    matched,
                });
            }
        }
    }
    hits.sort_by(|a, b| {
        (a.matched, a.name.to_lowercase(), a.kind, &a.id).cmp(&(b.matched, b.name.to_lowercase(), b.kind, &b.id))
    });
    hits.truncate(MAX_RESULTS);
    hits
}
