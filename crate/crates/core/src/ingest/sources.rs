use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use url::Url;

use super::feed::FeedKind;
use crate::model::{Language, MediaSource, MediumId};

pub const MIN_POLL_INTERVAL_SECS: u64 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedSource {
    pub id: String,
    pub medium_id: MediumId,
    pub kind: FeedKind,
    pub url: Url,
    /// Seconds between polls, at least 60.
    pub poll_interval: u64,
    /// ISO-3166 alpha-2.
    pub country: String,
    pub language: Language,
}

#[derive(Debug, thiserror::Error)]
pub enum SourcesError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("feed `{id}`: {reason}")]
    InvalidFeed { id: String, reason: String },
}

/// The operator's source list: media outlets and the feeds polled for each.
///
/// ```toml
/// [[media]]
/// id = "m1"
/// name = "Example News"
/// country = "GB"
///
/// [[feeds]]
/// id = "m1-world"
/// medium_id = "m1"
/// kind = "rss"            # rss | atom | list-page
/// url = "https://example.com/world/rss"
/// poll_interval = 300
/// country = "GB"
/// language = "en"         # en | ar
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourcesConfig {
    #[serde(default)]
    pub media: Vec<MediaSource>,
    #[serde(default)]
    pub feeds: Vec<FeedSource>,
}

impl SourcesConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, SourcesError> {
        let config: SourcesConfig = toml::from_str(text).map_err(|source| SourcesError::Toml {
            path: path.to_owned(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), SourcesError> {
        let known: std::collections::HashSet<_> = self.media.iter().map(|m| &m.id).collect();
        let mut ids = std::collections::HashSet::new();
        for feed in &self.feeds {
            let invalid = |reason: String| SourcesError::InvalidFeed {
                id: feed.id.clone(),
                reason,
            };
            if feed.poll_interval < MIN_POLL_INTERVAL_SECS {
                return Err(invalid(format!(
                    "poll_interval {} is below the {MIN_POLL_INTERVAL_SECS}s minimum",
                    feed.poll_interval
                )));
            }
            if feed.url.cannot_be_a_base() || feed.url.host().is_none() {
                return Err(invalid(format!("{} is not an absolute http(s) URL", feed.url)));
            }
            if feed.country.len() != 2 || !feed.country.chars().all(|c| c.is_ascii_uppercase()) {
                return Err(invalid(format!("country `{}` is not an ISO-3166 alpha-2 code", feed.country)));
            }
            if !self.media.is_empty() && !known.contains(&feed.medium_id) {
                return Err(invalid(format!("unknown medium `{}`", feed.medium_id)));
            }
            if !ids.insert(&feed.id) {
                return Err(invalid("duplicate feed id".into()));
            }
        }
        Ok(())
    }

    pub fn feeds_by_id(&self) -> HashMap<String, FeedSource> {
        self.feeds.iter().map(|f| (f.id.clone(), f.clone())).collect()
    }

    pub fn medium(&self, id: &MediumId) -> Option<&MediaSource> {
        self.media.iter().find(|m| &m.id == id)
    }
}

/// A sources file that is re-read when its modification time changes.
pub struct FeedRegistry {
    path: PathBuf,
    modified: Option<SystemTime>,
    current: Arc<SourcesConfig>,
}

impl FeedRegistry {
    pub fn load(path: impl Into<PathBuf>) -> Result<Self, SourcesError> {
        let path = path.into();
        let (config, modified) = Self::read(&path)?;
        Ok(FeedRegistry {
            path,
            modified,
            current: Arc::new(config),
        })
    }

    fn read(path: &Path) -> Result<(SourcesConfig, Option<SystemTime>), SourcesError> {
        let io = |source| SourcesError::Io { path: path.to_owned(), source };
        let modified = std::fs::metadata(path).and_then(|m| m.modified()).ok();
        let text = std::fs::read_to_string(path).map_err(io)?;
        Ok((SourcesConfig::parse(&text, path)?, modified))
    }

    pub fn current(&self) -> Arc<SourcesConfig> {
        Arc::clone(&self.current)
    }

    /// Reloads when the file changed on disk. An invalid new file is reported
    /// and the previous configuration stays active.
    pub fn reload_if_changed(&mut self) -> Result<bool, SourcesError> {
        let modified = std::fs::metadata(&self.path).and_then(|m| m.modified()).ok();
        if modified == self.modified {
            return Ok(false);
        }
        let (config, modified) = Self::read(&self.path)?;
        self.modified = modified;
        let changed = *self.current != config;
        self.current = Arc::new(config);
        Ok(changed)
    }
}
