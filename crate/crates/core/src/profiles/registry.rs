use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::ProfileError;
use crate::model::{Article, ClaimId};
use crate::textproc::{guess_language, preprocess};

/// A checkable claim that articles are scored against for stance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub claim_id: ClaimId,
    pub text: String,
    pub topic_id: String,
}

/// Reads the claims registry: a JSON array of `{claim_id, text, topic_id}`.
pub fn read_claims(reader: impl Read) -> Result<Vec<Claim>, ProfileError> {
    let claims: Vec<Claim> = serde_json::from_reader(reader).map_err(|e| ProfileError::Input(format!("claims: {e}")))?;
    let mut seen = BTreeSet::new();
    for c in &claims {
        if !seen.insert(&c.claim_id) {
            return Err(ProfileError::Input(format!("claims: duplicate claim_id `{}`", c.claim_id)));
        }
    }
    Ok(claims)
}

/// An editorial topic page. An article is on the topic when, after
/// preprocessing, it contains every token of at least one keyword phrase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDef {
    pub slug: String,
    pub name: String,
    pub keywords: Vec<String>,
}

impl TopicDef {
    pub fn matcher(&self) -> TopicMatcher {
        let phrases = self
            .keywords
            .iter()
            .map(|k| preprocess(k, guess_language(k)))
            .filter(|p| !p.is_empty())
            .collect();
        TopicMatcher { phrases }
    }
}

#[derive(Debug, Clone)]
pub struct TopicMatcher {
    phrases: Vec<Vec<String>>,
}

impl TopicMatcher {
    pub fn matches(&self, article: &Article) -> bool {
        let tokens: BTreeSet<String> = preprocess(&article.text(), article.language).into_iter().collect();
        self.phrases.iter().any(|p| p.iter().all(|t| tokens.contains(t)))
    }
}

/// Reads the topic registry: a JSON array of `{slug, name, keywords}`.
pub fn read_topics(reader: impl Read) -> Result<BTreeMap<String, TopicDef>, ProfileError> {
    let topics: Vec<TopicDef> = serde_json::from_reader(reader).map_err(|e| ProfileError::Input(format!("topics: {e}")))?;
    let mut out = BTreeMap::new();
    for t in topics {
        if t.slug.is_empty() || !t.slug.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-') {
            return Err(ProfileError::Input(format!("topics: invalid slug `{}`", t.slug)));
        }
        let slug = t.slug.clone();
        if out.insert(slug.clone(), t).is_some() {
            return Err(ProfileError::Input(format!("topics: duplicate slug `{slug}`")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Language, MediumId};
    use chrono::{TimeZone, Utc};
    use url::Url;

    #[test]
    fn keyword_phrases_match_after_preprocessing() {
        let topic = TopicDef {
            slug: "elections".into(),
            name: "Elections".into(),
            keywords: vec!["general election".into(), "الانتخابات".into()],
        };
        let m = topic.matcher();
        let article = |title: &str, lang| {
            Article::new(
                Url::parse("https://x.example/a").unwrap(),
                MediumId::from("m"),
                title,
                "Body.",
                lang,
                Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            )
        };
        assert!(m.matches(&article("The General Elections are near", Language::En)));
        assert!(!m.matches(&article("General strike called", Language::En)));
        assert!(m.matches(&article("نتائج الانتخابات", Language::Ar)));
    }

    #[test]
    fn registries_reject_duplicates() {
        let claims = r#"[{"claim_id":"c1","text":"x","topic_id":"t"},{"claim_id":"c1","text":"y","topic_id":"t"}]"#;
        assert!(read_claims(claims.as_bytes()).is_err());
        let topics = r#"[{"slug":"Bad Slug","name":"x","keywords":[]}]"#;
        assert!(read_topics(topics.as_bytes()).is_err());
    }
}
