//! HTTP fetching with a per-host politeness delay, and the feed poller that
//! turns feed entries into fetch requests.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use newsdesk_core::ingest::{parse_feed, FeedSource};
use serde::{Deserialize, Serialize};
use url::Url;

use crate::queue::{Queue, QueueError};
use crate::topics;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("fetching {url}: {reason}")]
pub struct FetchError {
    pub url: String,
    pub reason: String,
}

pub trait Fetcher: Send + Sync {
    fn get(&self, url: &Url) -> Result<Vec<u8>, FetchError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchConfig {
    /// Minimum gap between two requests to the same host.
    pub per_host_delay_ms: u64,
    pub timeout_secs: u64,
    pub user_agent: String,
    /// Responses larger than this are rejected.
    pub max_body_bytes: usize,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            per_host_delay_ms: 1000,
            timeout_secs: 20,
            user_agent: concat!("newsdesk/", env!("CARGO_PKG_VERSION")).into(),
            max_body_bytes: 5 << 20,
        }
    }
}

/// Spaces out requests per host: each caller reserves the next free slot
/// for its host and sleeps until then.
#[derive(Debug, Default)]
pub struct HostThrottle {
    delay: Duration,
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl HostThrottle {
    pub fn new(delay: Duration) -> Self {
        HostThrottle {
            delay,
            next_slot: Mutex::new(HashMap::new()),
        }
    }

    /// How long the caller must wait before contacting `host`.
    pub fn reserve(&self, host: &str, now: Instant) -> Duration {
        let mut slots = self.next_slot.lock().unwrap();
        let slot = slots.get(host).copied().filter(|s| *s > now).unwrap_or(now);
        slots.insert(host.to_owned(), slot + self.delay);
        slot - now
    }
}

pub struct HttpFetcher {
    client: reqwest::blocking::Client,
    throttle: HostThrottle,
    max_body_bytes: usize,
}

impl HttpFetcher {
    pub fn new(config: &FetchConfig) -> Result<Self, FetchError> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(config.user_agent.clone())
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| FetchError {
                url: String::new(),
                reason: e.to_string(),
            })?;
        Ok(HttpFetcher {
            client,
            throttle: HostThrottle::new(Duration::from_millis(config.per_host_delay_ms)),
            max_body_bytes: config.max_body_bytes,
        })
    }
}

impl Fetcher for HttpFetcher {
    fn get(&self, url: &Url) -> Result<Vec<u8>, FetchError> {
        let fail = |reason: String| FetchError {
            url: url.to_string(),
            reason,
        };
        let wait = self.throttle.reserve(url.host_str().unwrap_or(""), Instant::now());
        std::thread::sleep(wait);
        let response = self.client.get(url.clone()).send().map_err(|e| fail(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(fail(format!("HTTP {status}")));
        }
        let body = response.bytes().map_err(|e| fail(e.to_string()))?;
        if body.len() > self.max_body_bytes {
            return Err(fail(format!("body of {} bytes exceeds the limit", body.len())));
        }
        Ok(body.to_vec())
    }
}

/// Serves canned pages; unknown URLs fail.
#[derive(Debug, Default)]
pub struct FixtureFetcher {
    pages: HashMap<String, Vec<u8>>,
}

impl FixtureFetcher {
    pub fn new(pages: impl IntoIterator<Item = (Url, Vec<u8>)>) -> Self {
        FixtureFetcher {
            pages: pages.into_iter().map(|(u, b)| (u.to_string(), b)).collect(),
        }
    }
}

impl Fetcher for FixtureFetcher {
    fn get(&self, url: &Url) -> Result<Vec<u8>, FetchError> {
        self.pages.get(url.as_str()).cloned().ok_or_else(|| FetchError {
            url: url.to_string(),
            reason: "not found".into(),
        })
    }
}

/// Input of the fetch stage: one article page to download.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchRequest {
    pub source_id: String,
    pub url: Url,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_published_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Default)]
pub struct PollReport {
    pub feeds_polled: usize,
    pub requests: usize,
    pub errors: Vec<String>,
}

/// Polls due feeds and publishes a [`FetchRequest`] for every entry not seen before.
#[derive(Debug, Default)]
pub struct FeedPoller {
    last_poll: HashMap<String, DateTime<Utc>>,
    seen: HashSet<String>,
}

impl FeedPoller {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn poll(
        &mut self,
        feeds: &[FeedSource],
        fetcher: &dyn Fetcher,
        queue: &dyn Queue,
        now: DateTime<Utc>,
    ) -> Result<PollReport, QueueError> {
        let mut report = PollReport::default();
        for feed in feeds {
            let due = self
                .last_poll
                .get(&feed.id)
                .is_none_or(|t| now - *t >= chrono::Duration::seconds(feed.poll_interval as i64));
            if !due {
                continue;
            }
            self.last_poll.insert(feed.id.clone(), now);
            report.feeds_polled += 1;
            let entries = match fetcher.get(&feed.url).map_err(|e| e.to_string()).and_then(|raw| {
                parse_feed(&raw, feed.kind, &feed.url).map_err(|e| format!("{}: {e}", feed.id))
            }) {
                Ok(entries) => entries,
                Err(e) => {
                    log::warn!("{e}");
                    report.errors.push(e);
                    continue;
                }
            };
            for entry in entries {
                if !self.seen.insert(entry.link.to_string()) {
                    continue;
                }
                let request = FetchRequest {
                    source_id: feed.id.clone(),
                    url: entry.link,
                    feed_title: Some(entry.title).filter(|t| !t.is_empty()),
                    feed_published_at: entry.published_at,
                };
                queue.publish(topics::FETCH_REQUESTS, &serde_json::to_vec(&request).expect("request serializes"))?;
                report.requests += 1;
            }
        }
        if report.requests > 0 {
            queue.sync(topics::FETCH_REQUESTS)?;
        }
        Ok(report)
    }
}
