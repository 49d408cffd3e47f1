//! The deployment config file (TOML). Relative paths are resolved against
//! the directory holding the file. `NEWSDESK_STORE`, `NEWSDESK_API_BIND` and
//! `NEWSDESK_API_PORT` override the matching entries.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use newsdesk_core::classifiers::{StanceConfig, TrainConfig};
use newsdesk_core::clustering::ClusteringParams;
use newsdesk_core::profiles::ProfileConfig;
use serde::{Deserialize, Serialize};

use crate::fetch::FetchConfig;
use crate::stage::StagePolicy;

pub const ENV_STORE: &str = "NEWSDESK_STORE";
pub const ENV_API_PORT: &str = "NEWSDESK_API_PORT";
pub const ENV_API_BIND: &str = "NEWSDESK_API_BIND";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreConfig {
    /// SQLite file; `:memory:` keeps everything in process.
    pub path: PathBuf,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            path: "data/newsdesk.sqlite".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueueConfig {
    pub dir: PathBuf,
}

impl Default for QueueConfig {
    fn default() -> Self {
        QueueConfig {
            dir: "data/queue".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PublishConfig {
    /// Where `stories.json` and `profiles.json` are swapped in.
    pub dir: PathBuf,
}

impl Default for PublishConfig {
    fn default() -> Self {
        PublishConfig {
            dir: "data/published".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourcesSection {
    /// Feed source list; reloaded when it changes on disk.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelsConfig {
    pub section: Option<PathBuf>,
    pub propaganda: Option<PathBuf>,
    pub stance: StanceConfig,
    pub train: TrainConfig,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        ModelsConfig {
            section: None,
            propaganda: None,
            stance: StanceConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegistryConfig {
    pub claims: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApiConfig {
    pub bind: String,
    pub port: u16,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StagesConfig {
    pub batch_size: usize,
    pub max_retries: u32,
    /// Sleep between polls of an empty input.
    pub poll_ms: u64,
    /// Worker threads per stage name; unlisted stages get 1.
    pub parallelism: BTreeMap<String, usize>,
}

impl Default for StagesConfig {
    fn default() -> Self {
        let policy = StagePolicy::default();
        StagesConfig {
            batch_size: policy.batch_size,
            max_retries: policy.max_retries,
            poll_ms: 500,
            parallelism: BTreeMap::new(),
        }
    }
}

impl StagesConfig {
    pub fn policy(&self) -> StagePolicy {
        StagePolicy {
            batch_size: self.batch_size,
            max_retries: self.max_retries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulesConfig {
    pub clustering_minutes: u64,
    pub offline_hours: u64,
}

impl Default for SchedulesConfig {
    fn default() -> Self {
        SchedulesConfig {
            clustering_minutes: 30,
            offline_hours: 24,
        }
    }
}

impl SchedulesConfig {
    pub fn clustering_every(&self) -> Duration {
        Duration::from_secs(self.clustering_minutes * 60)
    }

    pub fn offline_every(&self) -> Duration {
        Duration::from_secs(self.offline_hours * 3600)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub store: StoreConfig,
    pub queue: QueueConfig,
    pub publish: PublishConfig,
    pub sources: SourcesSection,
    pub models: ModelsConfig,
    pub registry: RegistryConfig,
    pub api: ApiConfig,
    pub stages: StagesConfig,
    pub schedules: SchedulesConfig,
    pub clustering: ClusteringParams,
    pub profiles: ProfileConfig,
    pub fetch: FetchConfig,
}

impl Config {
    /// Reads the file, resolves its paths and applies the environment.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut config = Config::parse(&text, path)?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && p.as_os_str() != ":memory:" {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.store.path);
        fix(&mut self.queue.dir);
        fix(&mut self.publish.dir);
        for p in [
            &mut self.sources.path,
            &mut self.models.section,
            &mut self.models.propaganda,
            &mut self.registry.claims,
            &mut self.registry.topics,
            &mut self.registry.citations,
            &mut self.registry.labels,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Applies overrides from `get` (the process environment in [`Config::load`]).
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = get(ENV_STORE).filter(|v| !v.is_empty()) {
            self.store.path = v.into();
        }
        if let Some(v) = get(ENV_API_BIND).filter(|v| !v.is_empty()) {
            self.api.bind = v;
        }
        if let Some(v) = get(ENV_API_PORT).filter(|v| !v.is_empty()) {
            self.api.port = v
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{ENV_API_PORT}=`{v}` is not a port number")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.stages.batch_size == 0 {
            return Err(ConfigError::Invalid("stages.batch_size must be positive".into()));
        }
        if let Some((name, _)) = self.stages.parallelism.iter().find(|(_, &n)| n == 0) {
            return Err(ConfigError::Invalid(format!("stages.parallelism.{name} must be positive")));
        }
        if self.schedules.clustering_minutes == 0 || self.schedules.offline_hours == 0 {
            return Err(ConfigError::Invalid("schedule intervals must be positive".into()));
        }
        self.clustering
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("clustering: {e}")))
    }
}
