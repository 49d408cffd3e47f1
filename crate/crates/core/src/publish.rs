//! Results published by the scheduled jobs and read by the API. Files are
//! replaced atomically, so a reader sees either the old or the new version.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::clustering::Story;
use crate::model::{MediaSource, MediumId};
use crate::profiles::{Claim, MediaProfile, TopicDef, TopicStats};

pub const STORIES_FILE: &str = "stories.json";
pub const PROFILES_FILE: &str = "profiles.json";

/// Output of the latest clustering run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PublishedStories {
    pub generated_at: Option<DateTime<Utc>>,
    pub stories: Vec<Story>,
}

/// Output of the latest offline aggregation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PublishedProfiles {
    pub generated_at: Option<DateTime<Utc>>,
    pub media: BTreeMap<MediumId, MediaSource>,
    pub profiles: BTreeMap<MediumId, MediaProfile>,
    pub topic_defs: BTreeMap<String, TopicDef>,
    pub topics: BTreeMap<String, TopicStats>,
    pub claims: Vec<Claim>,
}

/// Writes `bytes` to a sibling temporary file, syncs it and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Ok(d) = fs::File::open(dir) {
        // directory fsync is best effort; not every platform allows it
        let _ = d.sync_all();
    }
    Ok(())
}

pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    write_atomic(path, &bytes)
}

/// Reads a JSON file, or `T::default()` when it does not exist yet.
pub fn read_json_or_default<T: DeserializeOwned + Default>(path: &Path) -> std::io::Result<T> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(std::io::Error::other),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(T::default()),
        Err(e) => Err(e),
    }
}
