use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::media::{frame_distribution, propaganda_distribution};
use super::registry::TopicDef;
use super::ProfileError;
use crate::clustering::{Story, StoryId};
use crate::model::{Article, ArticleId, FrameLabel, MediaSource, MediumId, PropagandaLabel};

/// Country recorded for articles whose medium is not in the source list.
pub const UNKNOWN_COUNTRY: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryCoverage {
    pub articles: usize,
    /// All articles from the country's media, on any topic.
    pub total_articles: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumCoverage {
    pub articles: usize,
    pub propagandistic_articles: usize,
    /// Propagandistic share of this medium's articles on the topic.
    pub propagandistic_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTotals {
    pub stories: usize,
    pub articles: usize,
    pub media: usize,
    pub countries: usize,
    pub propagandistic_articles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicStats {
    pub topic_id: String,
    pub name: String,
    pub countries: BTreeMap<String, CountryCoverage>,
    pub media: BTreeMap<MediumId, MediumCoverage>,
    pub totals: TopicTotals,
    /// Stories on the topic, most recently updated first.
    pub story_ids: Vec<StoryId>,
    pub propaganda_distribution: BTreeMap<PropagandaLabel, f64>,
    pub frame_distribution: BTreeMap<FrameLabel, f64>,
}

fn country<'a>(media: &'a BTreeMap<MediumId, MediaSource>, id: &MediumId) -> &'a str {
    media.get(id).map_or(UNKNOWN_COUNTRY, |m| m.country.as_str())
}

/// Statistics for one registered topic. A story is on the topic when any of
/// its articles matches the topic keywords; all of its articles then count.
pub fn build_topic_stats(
    topic_id: &str,
    topics: &BTreeMap<String, TopicDef>,
    stories: &[Story],
    articles: &BTreeMap<ArticleId, Article>,
    media: &BTreeMap<MediumId, MediaSource>,
) -> Result<TopicStats, ProfileError> {
    let topic = topics
        .get(topic_id)
        .ok_or_else(|| ProfileError::NotFound(format!("topic `{topic_id}`")))?;
    let matcher = topic.matcher();

    let mut on_topic: Vec<&Story> = stories
        .iter()
        .filter(|s| s.article_ids.iter().filter_map(|id| articles.get(id)).any(|a| matcher.matches(a)))
        .collect();
    let latest = |s: &Story| s.article_ids.iter().filter_map(|id| articles.get(id)).map(|a| a.published_at).max();
    on_topic.sort_by(|a, b| latest(b).cmp(&latest(a)).then(a.id.cmp(&b.id)));

    let ids: BTreeSet<&ArticleId> = on_topic.iter().flat_map(|s| s.article_ids.iter()).collect();
    let topic_articles: Vec<&Article> = ids.iter().filter_map(|id| articles.get(*id)).collect();

    let mut country_totals: BTreeMap<&str, usize> = BTreeMap::new();
    for a in articles.values() {
        *country_totals.entry(country(media, &a.medium_id)).or_default() += 1;
    }
    let mut countries: BTreeMap<String, CountryCoverage> = BTreeMap::new();
    let mut by_medium: BTreeMap<MediumId, MediumCoverage> = BTreeMap::new();
    for a in &topic_articles {
        let c = country(media, &a.medium_id);
        countries
            .entry(c.to_owned())
            .or_insert_with(|| CountryCoverage {
                articles: 0,
                total_articles: country_totals[c],
                ratio: 0.0,
            })
            .articles += 1;
        let m = by_medium.entry(a.medium_id.clone()).or_insert(MediumCoverage {
            articles: 0,
            propagandistic_articles: 0,
            propagandistic_ratio: 0.0,
        });
        m.articles += 1;
        if a.propaganda.is_some_and(|p| p.label.is_propagandistic()) {
            m.propagandistic_articles += 1;
        }
    }
    for c in countries.values_mut() {
        c.ratio = c.articles as f64 / c.total_articles as f64;
    }
    for m in by_medium.values_mut() {
        m.propagandistic_ratio = m.propagandistic_articles as f64 / m.articles as f64;
    }

    Ok(TopicStats {
        topic_id: topic.slug.clone(),
        name: topic.name.clone(),
        totals: TopicTotals {
            stories: on_topic.len(),
            articles: topic_articles.len(),
            media: by_medium.len(),
            countries: countries.len(),
            propagandistic_articles: by_medium.values().map(|m| m.propagandistic_articles).sum(),
        },
        countries,
        media: by_medium,
        story_ids: on_topic.iter().map(|s| s.id).collect(),
        propaganda_distribution: propaganda_distribution(topic_articles.iter().copied()),
        frame_distribution: frame_distribution(topic_articles.iter().copied()),
    })
}
