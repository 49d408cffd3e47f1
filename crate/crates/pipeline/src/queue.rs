//! Embedded durable log: one append-only file per topic, plus committed
//! offsets per consumer group.
//!
//! Record framing is `[len: u32 LE][checksum: u32 LE][payload]`. On open, a
//! torn or corrupt tail (a crash mid-append) is truncated away.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use newsdesk_core::hash::fnv1a64;
use newsdesk_core::publish::write_atomic;

#[derive(Debug, thiserror::Error)]
pub enum QueueError {
    #[error("no topic `{0}`")]
    NoTopic(String),
    #[error("invalid topic name `{0}`")]
    InvalidTopic(String),
    #[error("group `{group}` cannot move its offset on `{topic}` back from {committed} to {requested}")]
    OffsetRegression { group: String, topic: String, committed: u64, requested: u64 },
    #[error("offset {requested} is past the end of `{topic}` ({end})")]
    BeyondEnd { topic: String, requested: u64, end: u64 },
    #[error("queue handle crashed; reopen it")]
    Crashed,
    #[error("corrupt offsets file {0}")]
    CorruptOffsets(PathBuf),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub offset: u64,
    pub payload: Vec<u8>,
}

/// Message log with consumer offsets and at-least-once delivery.
pub trait Queue: Send + Sync {
    /// Creates the topic if it does not exist.
    fn create_topic(&self, topic: &str) -> Result<(), QueueError>;
    fn topics(&self) -> Result<Vec<String>, QueueError>;
    fn publish(&self, topic: &str, payload: &[u8]) -> Result<u64, QueueError>;
    /// Makes everything published to `topic` so far durable.
    fn sync(&self, topic: &str) -> Result<(), QueueError>;
    /// Up to `max` messages starting at offset `from`.
    fn read(&self, topic: &str, from: u64, max: usize) -> Result<Vec<Message>, QueueError>;
    /// Offset the next published message will get.
    fn end_offset(&self, topic: &str) -> Result<u64, QueueError>;
    /// Next offset `group` will consume from `topic` (0 if never committed).
    fn committed(&self, group: &str, topic: &str) -> Result<u64, QueueError>;
    /// Durably records that `group` consumed everything before `next`.
    /// Offsets never move backwards.
    fn commit(&self, group: &str, topic: &str, next: u64) -> Result<(), QueueError>;

    /// Fault injection hook: leave a partial record at the end of `topic`
    /// and stop serving requests, as a crash mid-write would. Implementations
    /// that cannot tear a write may do nothing.
    fn inject_torn_write(&self, _topic: &str, _payload: &[u8]) -> Result<(), QueueError> {
        Ok(())
    }

    fn lag(&self, group: &str, topic: &str) -> Result<u64, QueueError> {
        Ok(self.end_offset(topic)? - self.committed(group, topic)?)
    }
}

const HEADER: usize = 8;

fn checksum(payload: &[u8]) -> u32 {
    let h = fnv1a64(payload);
    (h ^ (h >> 32)) as u32
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '-' | '_' | '.'))
}

struct TopicLog {
    file: File,
    /// Byte position of every record, plus the end position.
    positions: Vec<u64>,
}

impl TopicLog {
    fn open(path: &Path) -> Result<Self, QueueError> {
        let mut file = OpenOptions::new().read(true).create(true).append(true).open(path)?;
        let mut bytes = Vec::new();
        file.seek(SeekFrom::Start(0))?;
        file.read_to_end(&mut bytes)?;
        let mut positions = vec![0u64];
        let mut pos = 0usize;
        while pos + HEADER <= bytes.len() {
            let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
            let sum = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap());
            let end = pos + HEADER + len;
            if end > bytes.len() || checksum(&bytes[pos + HEADER..end]) != sum {
                break;
            }
            pos = end;
            positions.push(pos as u64);
        }
        if pos < bytes.len() {
            log::warn!("{}: truncating {} bytes of torn tail", path.display(), bytes.len() - pos);
            file.set_len(pos as u64)?;
            file.sync_all()?;
        }
        Ok(TopicLog { file, positions })
    }

    fn len(&self) -> u64 {
        self.positions.len() as u64 - 1
    }
}

struct Inner {
    topics: BTreeMap<String, TopicLog>,
    offsets: BTreeMap<String, BTreeMap<String, u64>>,
    crashed: bool,
}

/// File-backed [`Queue`] rooted at a directory:
/// `topics/<name>.log` and `offsets/<group>.json`.
///
/// Topic ends are tracked in memory, so one process should share a single
/// instance; appends through another instance show up only after a reopen.
pub struct FileQueue {
    dir: PathBuf,
    inner: Mutex<Inner>,
}

impl FileQueue {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, QueueError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("topics"))?;
        fs::create_dir_all(dir.join("offsets"))?;
        let mut topics = BTreeMap::new();
        for entry in fs::read_dir(dir.join("topics"))? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(".log")) else {
                continue;
            };
            if valid_name(name) {
                topics.insert(name.to_owned(), TopicLog::open(&path)?);
            }
        }
        let mut offsets = BTreeMap::new();
        for entry in fs::read_dir(dir.join("offsets"))? {
            let path = entry?.path();
            let Some(group) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(".json")) else {
                continue;
            };
            let bytes = fs::read(&path)?;
            let map: BTreeMap<String, u64> =
                serde_json::from_slice(&bytes).map_err(|_| QueueError::CorruptOffsets(path.clone()))?;
            offsets.insert(group.to_owned(), map);
        }
        Ok(FileQueue {
            dir,
            inner: Mutex::new(Inner { topics, offsets, crashed: false }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self) -> Result<std::sync::MutexGuard<'_, Inner>, QueueError> {
        let inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if inner.crashed {
            return Err(QueueError::Crashed);
        }
        Ok(inner)
    }

    /// Appends copies of the messages at `[from, end)` to the end of
    /// `topic`, so every consumer sees them again without any committed
    /// offset moving backwards. Returns how many were re-published.
    pub fn replay(&self, topic: &str, from: u64) -> Result<u64, QueueError> {
        let end = self.end_offset(topic)?;
        let mut n = 0;
        let mut at = from;
        while at < end {
            let batch = self.read(topic, at, 256)?;
            for m in batch.iter().take_while(|m| m.offset < end) {
                self.publish(topic, &m.payload)?;
                at = m.offset + 1;
                n += 1;
            }
        }
        self.sync(topic)?;
        Ok(n)
    }

    /// Committed offsets of every group, by group then topic.
    pub fn groups(&self) -> Result<BTreeMap<String, BTreeMap<String, u64>>, QueueError> {
        Ok(self.lock()?.offsets.clone())
    }
}

fn frame(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&checksum(payload).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

impl Queue for FileQueue {
    fn inject_torn_write(&self, topic: &str, payload: &[u8]) -> Result<(), QueueError> {
        let mut inner = self.lock()?;
        let log = inner.topics.get_mut(topic).ok_or_else(|| QueueError::NoTopic(topic.into()))?;
        let mut frame = frame(payload);
        frame.truncate(HEADER + payload.len() / 2);
        log.file.write_all(&frame)?;
        log.file.sync_data()?;
        inner.crashed = true;
        Ok(())
    }

    fn create_topic(&self, topic: &str) -> Result<(), QueueError> {
        if !valid_name(topic) {
            return Err(QueueError::InvalidTopic(topic.into()));
        }
        let mut inner = self.lock()?;
        if !inner.topics.contains_key(topic) {
            let log = TopicLog::open(&self.dir.join("topics").join(format!("{topic}.log")))?;
            inner.topics.insert(topic.to_owned(), log);
        }
        Ok(())
    }

    fn topics(&self) -> Result<Vec<String>, QueueError> {
        Ok(self.lock()?.topics.keys().cloned().collect())
    }

    fn publish(&self, topic: &str, payload: &[u8]) -> Result<u64, QueueError> {
        let mut inner = self.lock()?;
        let log = inner.topics.get_mut(topic).ok_or_else(|| QueueError::NoTopic(topic.into()))?;
        let offset = log.len();
        let frame = frame(payload);
        if let Err(e) = log.file.write_all(&frame) {
            // the file may now end in a partial record; only a reopen can repair it
            inner.crashed = true;
            return Err(e.into());
        }
        let end = log.positions.last().copied().unwrap_or(0) + frame.len() as u64;
        log.positions.push(end);
        Ok(offset)
    }

    fn sync(&self, topic: &str) -> Result<(), QueueError> {
        let inner = self.lock()?;
        let log = inner.topics.get(topic).ok_or_else(|| QueueError::NoTopic(topic.into()))?;
        log.file.sync_data()?;
        Ok(())
    }

    fn read(&self, topic: &str, from: u64, max: usize) -> Result<Vec<Message>, QueueError> {
        let mut inner = self.lock()?;
        let log = inner.topics.get_mut(topic).ok_or_else(|| QueueError::NoTopic(topic.into()))?;
        let end = log.len().min(from.saturating_add(max as u64));
        if from >= end {
            return Ok(Vec::new());
        }
        let start_pos = log.positions[from as usize];
        let end_pos = log.positions[end as usize];
        let mut bytes = vec![0u8; (end_pos - start_pos) as usize];
        log.file.seek(SeekFrom::Start(start_pos))?;
        log.file.read_exact(&mut bytes)?;
        let mut out = Vec::with_capacity((end - from) as usize);
        for offset in from..end {
            let a = (log.positions[offset as usize] - start_pos) as usize + HEADER;
            let b = (log.positions[offset as usize + 1] - start_pos) as usize;
            out.push(Message {
                offset,
                payload: bytes[a..b].to_vec(),
            });
        }
        Ok(out)
    }

    fn end_offset(&self, topic: &str) -> Result<u64, QueueError> {
        let inner = self.lock()?;
        let log = inner.topics.get(topic).ok_or_else(|| QueueError::NoTopic(topic.into()))?;
        Ok(log.len())
    }

    fn committed(&self, group: &str, topic: &str) -> Result<u64, QueueError> {
        let inner = self.lock()?;
        if !inner.topics.contains_key(topic) {
            return Err(QueueError::NoTopic(topic.into()));
        }
        Ok(inner.offsets.get(group).and_then(|g| g.get(topic)).copied().unwrap_or(0))
    }

    fn commit(&self, group: &str, topic: &str, next: u64) -> Result<(), QueueError> {
        if !valid_name(group) {
            return Err(QueueError::InvalidTopic(group.into()));
        }
        let mut inner = self.lock()?;
        let end = inner.topics.get(topic).ok_or_else(|| QueueError::NoTopic(topic.into()))?.len();
        if next > end {
            return Err(QueueError::BeyondEnd { topic: topic.into(), requested: next, end });
        }
        let committed = inner.offsets.get(group).and_then(|g| g.get(topic)).copied().unwrap_or(0);
        if next < committed {
            return Err(QueueError::OffsetRegression {
                group: group.into(),
                topic: topic.into(),
                committed,
                requested: next,
            });
        }
        if next == committed {
            return Ok(());
        }
        let mut updated = inner.offsets.get(group).cloned().unwrap_or_default();
        updated.insert(topic.to_owned(), next);
        let bytes = serde_json::to_vec(&updated).map_err(std::io::Error::other)?;
        write_atomic(&self.dir.join("offsets").join(format!("{group}.json")), &bytes)?;
        inner.offsets.insert(group.to_owned(), updated);
        Ok(())
    }
}
