use serde::{Deserialize, Serialize};

use crate::hash::fnv1a64;
use crate::model::{Article, ArticleId};

/// Casefolds and collapses whitespace so that formatting-only differences
/// between two copies of an article disappear.
pub fn normalize_for_fingerprint(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// 64-bit FNV-1a over the normalized title and body.
pub fn content_fingerprint(title: &str, body: &str) -> u64 {
    let mut text = normalize_for_fingerprint(title);
    text.push('\n');
    text.push_str(&normalize_for_fingerprint(body));
    fnv1a64(text.as_bytes())
}

/// Two articles are duplicates when either component matches.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DedupKey {
    pub url: ArticleId,
    pub content: u64,
}

impl DedupKey {
    pub fn is_duplicate_of(&self, other: &DedupKey) -> bool {
        self.url == other.url || self.content == other.content
    }
}

pub fn dedup_key(article: &Article) -> DedupKey {
    DedupKey {
        url: ArticleId::for_url(&article.canonical_url),
        content: content_fingerprint(&article.title, &article.body),
    }
}
