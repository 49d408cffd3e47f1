//! The read model the handlers serve: the store, the latest stories and the
//! latest profiles, joined once when the snapshot is built.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, Utc};
use newsdesk_core::clustering::StoryId;
use newsdesk_core::ingest::{ArticleStore, StoreError};
use newsdesk_core::profiles::{MediaProfile, TopicDef, TopicStats};
use newsdesk_core::publish::{read_json_or_default, PublishedProfiles, PublishedStories, PROFILES_FILE, STORIES_FILE};
use newsdesk_core::{Article, ArticleId, Language, MediaSource, MediumId, PropagandaLabel};
use serde::{Deserialize, Serialize};
use url::Url;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumRef {
    pub id: MediumId,
    pub name: String,
    pub logo_url: Option<Url>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleSummary {
    pub article_id: ArticleId,
    pub title: String,
    pub medium: MediumRef,
    pub published_at: DateTime<Utc>,
    pub propaganda_label: Option<PropagandaLabel>,
    pub language: Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryCard {
    pub story_id: StoryId,
    pub title: String,
    /// Newest first.
    pub articles: Vec<ArticleSummary>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("reading published results: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub stories_generated_at: Option<DateTime<Utc>>,
    pub profiles_generated_at: Option<DateTime<Utc>>,
    articles: BTreeMap<ArticleId, Article>,
    media: BTreeMap<MediumId, MediaSource>,
    profiles: BTreeMap<MediumId, MediaProfile>,
    topic_defs: BTreeMap<String, TopicDef>,
    topics: BTreeMap<String, TopicStats>,
    /// Most recently updated first.
    cards: Vec<StoryCard>,
    card_index: HashMap<StoryId, usize>,
    /// Newest first.
    by_medium: HashMap<MediumId, Vec<ArticleId>>,
}

fn newest_first(a: &Article, b: &Article) -> std::cmp::Ordering {
    b.published_at.cmp(&a.published_at).then_with(|| a.id.cmp(&b.id))
}

impl Snapshot {
    pub fn build(articles: Vec<Article>, stories: &PublishedStories, profiles: PublishedProfiles) -> Snapshot {
        let articles: BTreeMap<ArticleId, Article> = articles.into_iter().map(|a| (a.id.clone(), a)).collect();
        let mut snap = Snapshot {
            stories_generated_at: stories.generated_at,
            profiles_generated_at: profiles.generated_at,
            media: profiles.media,
            profiles: profiles.profiles,
            topic_defs: profiles.topic_defs,
            topics: profiles.topics,
            ..Default::default()
        };

        let mut cards: Vec<StoryCard> = stories
            .stories
            .iter()
            .filter_map(|s| {
                let mut members: Vec<&Article> = s.article_ids.iter().filter_map(|id| articles.get(id)).collect();
                members.sort_by(|a, b| newest_first(a, b));
                let updated_at = members.first()?.published_at;
                Some(StoryCard {
                    story_id: s.id,
                    title: s.title.clone(),
                    articles: members.into_iter().map(|a| snap.summary(a)).collect(),
                    updated_at,
                })
            })
            .collect();
        cards.sort_by(|a, b| b.updated_at.cmp(&a.updated_at).then(a.story_id.cmp(&b.story_id)));
        snap.card_index = cards.iter().enumerate().map(|(i, c)| (c.story_id, i)).collect();
        snap.cards = cards;

        let mut sorted: Vec<&Article> = articles.values().collect();
        sorted.sort_by(|a, b| newest_first(a, b));
        for a in sorted {
            snap.by_medium.entry(a.medium_id.clone()).or_default().push(a.id.clone());
        }
        snap.articles = articles;
        snap
    }

    /// Reads the store and the published files in `publish_dir`; missing
    /// files count as empty.
    pub fn load(store: &dyn ArticleStore, publish_dir: &Path) -> Result<Snapshot, SnapshotError> {
        let stories: PublishedStories = read_json_or_default(&publish_dir.join(STORIES_FILE))?;
        let profiles: PublishedProfiles = read_json_or_default(&publish_dir.join(PROFILES_FILE))?;
        Ok(Snapshot::build(store.snapshot()?, &stories, profiles))
    }

    pub fn medium_ref(&self, id: &MediumId) -> MediumRef {
        match self.media.get(id) {
            Some(m) => MediumRef {
                id: id.clone(),
                name: m.name.clone(),
                logo_url: m.logo_url.clone(),
            },
            None => MediumRef {
                id: id.clone(),
                name: id.as_str().to_owned(),
                logo_url: None,
            },
        }
    }

    pub fn summary(&self, a: &Article) -> ArticleSummary {
        ArticleSummary {
            article_id: a.id.clone(),
            title: a.title.clone(),
            medium: self.medium_ref(&a.medium_id),
            published_at: a.published_at,
            propaganda_label: a.propaganda.map(|p| p.label),
            language: a.language,
        }
    }

    pub fn cards(&self) -> &[StoryCard] {
        &self.cards
    }

    pub fn card(&self, id: StoryId) -> Option<&StoryCard> {
        self.card_index.get(&id).map(|&i| &self.cards[i])
    }

    pub fn article(&self, id: &ArticleId) -> Option<&Article> {
        self.articles.get(id)
    }

    pub fn medium(&self, id: &MediumId) -> Option<&MediaSource> {
        self.media.get(id)
    }

    pub fn media(&self) -> &BTreeMap<MediumId, MediaSource> {
        &self.media
    }

    pub fn profile(&self, id: &MediumId) -> Option<&MediaProfile> {
        self.profiles.get(id)
    }

    pub fn articles_of(&self, id: &MediumId) -> impl Iterator<Item = &Article> {
        self.by_medium.get(id).into_iter().flatten().map(|a| &self.articles[a])
    }

    pub fn topic_defs(&self) -> &BTreeMap<String, TopicDef> {
        &self.topic_defs
    }

    pub fn topic(&self, slug: &str) -> Option<&TopicStats> {
        self.topics.get(slug)
    }
}
