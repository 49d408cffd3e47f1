//! Article persistence: the [`ArticleStore`] interface, an in-memory store and
//! the SQLite reference store, plus JSON Lines export/import.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Mutex;

use rusqlite::{params, Connection, OptionalExtension};
use serde::{Deserialize, Serialize};

use super::dedup::dedup_key;
use crate::model::{Article, ArticleId, ClaimId, FrameLabel, InvariantViolation, PropagandaResult, SectionLabel, StanceLabel};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
    #[error("article {0} not found")]
    NotFound(ArticleId),
    #[error("annotation `{field}` of article {id} already holds a different value")]
    AnnotationConflict { id: ArticleId, field: &'static str },
    #[error("sqlite: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Import { line: usize, source: serde_json::Error },
}

/// A single analysis result, written once by the stage that produces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Annotation {
    Section { label: SectionLabel },
    Propaganda { result: PropagandaResult },
    Frame { distribution: BTreeMap<FrameLabel, f64> },
    Stance { claim_id: ClaimId, label: StanceLabel },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    /// Rejected because this stored article has the same URL or content fingerprint.
    Duplicate(ArticleId),
}

fn write_once<T: PartialEq + Clone>(
    slot: &mut Option<T>,
    value: &T,
    id: &ArticleId,
    field: &'static str,
) -> Result<bool, StoreError> {
    match slot {
        None => {
            *slot = Some(value.clone());
            Ok(true)
        }
        Some(existing) if existing == value => Ok(false),
        Some(_) => Err(StoreError::AnnotationConflict { id: id.clone(), field }),
    }
}

/// Applies `annotation` to `article`. Returns `false` when the identical
/// value was already present (re-delivery), an error when a different one was.
pub fn apply_annotation(article: &mut Article, annotation: &Annotation) -> Result<bool, StoreError> {
    let id = article.id.clone();
    let changed = match annotation {
        Annotation::Section { label } => write_once(&mut article.section, label, &id, "section")?,
        Annotation::Propaganda { result } => write_once(&mut article.propaganda, result, &id, "propaganda")?,
        Annotation::Frame { distribution } => {
            write_once(&mut article.frame_distribution, distribution, &id, "frame_distribution")?
        }
        Annotation::Stance { claim_id, label } => match article.stances.get(claim_id) {
            None => {
                article.stances.insert(claim_id.clone(), *label);
                true
            }
            Some(existing) if existing == label => false,
            Some(_) => return Err(StoreError::AnnotationConflict { id, field: "stances" }),
        },
    };
    article.validate()?;
    Ok(changed)
}

/// Persistence interface. Inserts are atomic insert-if-absent on the dedup key.
pub trait ArticleStore: Send + Sync {
    fn insert_if_absent(&self, article: &Article) -> Result<InsertOutcome, StoreError>;
    fn get(&self, id: &ArticleId) -> Result<Option<Article>, StoreError>;
    fn annotate(&self, id: &ArticleId, annotation: &Annotation) -> Result<bool, StoreError>;
    /// All articles ordered by id.
    fn snapshot(&self) -> Result<Vec<Article>, StoreError>;
    fn len(&self) -> Result<usize, StoreError>;

    fn is_empty(&self) -> Result<bool, StoreError> {
        Ok(self.len()? == 0)
    }
}

#[derive(Default)]
struct MemoryInner {
    articles: BTreeMap<ArticleId, Article>,
    by_fingerprint: HashMap<u64, ArticleId>,
}

#[derive(Default)]
pub struct MemoryStore {
    inner: Mutex<MemoryInner>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl ArticleStore for MemoryStore {
    fn insert_if_absent(&self, article: &Article) -> Result<InsertOutcome, StoreError> {
        article.validate()?;
        let key = dedup_key(article);
        let mut inner = self.inner.lock().unwrap();
        if inner.articles.contains_key(&key.url) {
            return Ok(InsertOutcome::Duplicate(key.url));
        }
        if let Some(existing) = inner.by_fingerprint.get(&key.content) {
            return Ok(InsertOutcome::Duplicate(existing.clone()));
        }
        inner.by_fingerprint.insert(key.content, article.id.clone());
        inner.articles.insert(article.id.clone(), article.clone());
        Ok(InsertOutcome::Inserted)
    }

    fn get(&self, id: &ArticleId) -> Result<Option<Article>, StoreError> {
        Ok(self.inner.lock().unwrap().articles.get(id).cloned())
    }

    fn annotate(&self, id: &ArticleId, annotation: &Annotation) -> Result<bool, StoreError> {
        let mut inner = self.inner.lock().unwrap();
        let article = inner
            .articles
            .get_mut(id)
            .ok_or_else(|| StoreError::NotFound(id.clone()))?;
        let mut updated = article.clone();
        let changed = apply_annotation(&mut updated, annotation)?;
        *article = updated;
        Ok(changed)
    }

    fn snapshot(&self) -> Result<Vec<Article>, StoreError> {
        Ok(self.inner.lock().unwrap().articles.values().cloned().collect())
    }

    fn len(&self) -> Result<usize, StoreError> {
        Ok(self.inner.lock().unwrap().articles.len())
    }
}

/// SQLite-backed store. Uniqueness of both dedup components is enforced by
/// the schema, so concurrent inserts cannot race past each other.
pub struct SqliteStore {
    conn: Mutex<Connection>,
}

impl SqliteStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::init(Connection::open(path)?)
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self, StoreError> {
        conn.execute_batch(
            "PRAGMA journal_mode = WAL;
             PRAGMA synchronous = FULL;
             CREATE TABLE IF NOT EXISTS articles (
                 id TEXT PRIMARY KEY,
                 fingerprint INTEGER NOT NULL UNIQUE,
                 doc TEXT NOT NULL
             );",
        )?;
        Ok(SqliteStore { conn: Mutex::new(conn) })
    }
}

impl ArticleStore for SqliteStore {
    fn insert_if_absent(&self, article: &Article) -> Result<InsertOutcome, StoreError> {
        article.validate()?;
        let key = dedup_key(article);
        let doc = serde_json::to_string(article)?;
        let conn = self.conn.lock().unwrap();
        let inserted = conn.execute(
            "INSERT OR IGNORE INTO articles (id, fingerprint, doc) VALUES (?1, ?2, ?3)",
            params![article.id.as_str(), key.content as i64, doc],
        )?;
        if inserted == 1 {
            return Ok(InsertOutcome::Inserted);
        }
        let existing: String = conn.query_row(
            "SELECT id FROM articles WHERE id = ?1 OR fingerprint = ?2 ORDER BY id = ?1 DESC LIMIT 1",
            params![article.id.as_str(), key.content as i64],
            |row| row.get(0),
        )?;
        Ok(InsertOutcome::Duplicate(ArticleId::from(existing.as_str())))
    }

    fn get(&self, id: &ArticleId) -> Result<Option<Article>, StoreError> {
        let conn = self.conn.lock().unwrap();
        let doc: Option<String> = conn
            .query_row("SELECT doc FROM articles WHERE id = ?1", params![id.as_str()], |row| row.get(0))
            .optional()?;
        Ok(doc.map(|d| serde_json::from_str(&d)).transpose()?)
    }

    fn annotate(&self, id: &ArticleId, annotation: &Annotation) -> Result<bool, StoreError> {
        let mut conn = self.conn.lock().unwrap();
        let tx = conn.transaction()?;
        let doc: Option<String> = tx
            .query_row("SELECT doc FROM articles WHERE id = ?1", params![id.as_str()], |row| row.get(0))
            .optional()?;
        let mut article: Article = match doc {
            Some(d) => serde_json::from_str(&d)?,
            None => return Err(StoreError::NotFound(id.clone())),
        };
        let changed = apply_annotation(&mut article, annotation)?;
        if changed {
            tx.execute(
                "UPDATE articles SET doc = ?2 WHERE id = ?1",
                params![id.as_str(), serde_json::to_string(&article)?],
            )?;
        }
        tx.commit()?;
        Ok(changed)
    }

    fn snapshot(&self) -> Result<Vec<Article>, StoreError> {
        let conn = self.conn.lock().unwrap();
        let mut stmt = conn.prepare("SELECT doc FROM articles ORDER BY id")?;
        let docs = stmt.query_map([], |row| row.get::<_, String>(0))?;
        let mut out = Vec::new();
        for doc in docs {
            out.push(serde_json::from_str(&doc?)?);
        }
        Ok(out)
    }

    fn len(&self) -> Result<usize, StoreError> {
        let conn = self.conn.lock().unwrap();
        let n: i64 = conn.query_row("SELECT COUNT(*) FROM articles", [], |row| row.get(0))?;
        Ok(n as usize)
    }
}

/// Writes every article as one JSON object per line, ordered by id.
pub fn export_jsonl(store: &dyn ArticleStore, mut out: impl Write) -> Result<usize, StoreError> {
    let articles = store.snapshot()?;
    for article in &articles {
        serde_json::to_writer(&mut out, article)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(articles.len())
}

/// Reads JSON Lines articles into `store`; returns how many were new.
pub fn import_jsonl(store: &dyn ArticleStore, input: impl BufRead) -> Result<usize, StoreError> {
    let mut inserted = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let article: Article =
            serde_json::from_str(&line).map_err(|source| StoreError::Import { line: i + 1, source })?;
        if store.insert_if_absent(&article)? == InsertOutcome::Inserted {
            inserted += 1;
        }
    }
    Ok(inserted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Language, MediumId, PropagandaLabel};
    use chrono::{TimeZone, Utc};
    use std::sync::Arc;
    use url::Url;

    fn article(n: usize) -> Article {
        Article::new(
            Url::parse(&format!("https://x.com/{n}")).unwrap(),
            MediumId::from("m"),
            format!("title {n}"),
            format!("body {n}"),
            Language::En,
            Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        )
    }

    fn stores() -> Vec<Box<dyn ArticleStore>> {
        vec![Box::new(MemoryStore::new()), Box::new(SqliteStore::in_memory().unwrap())]
    }

    #[test]
    fn insert_if_absent_on_url_and_fingerprint() {
        for store in stores() {
            let a = article(1);
            assert_eq!(store.insert_if_absent(&a).unwrap(), InsertOutcome::Inserted);
            assert_eq!(store.insert_if_absent(&a).unwrap(), InsertOutcome::Duplicate(a.id.clone()));
            let mut copy = article(2);
            copy.title = a.title.clone();
            copy.body = a.body.clone();
            assert_eq!(store.insert_if_absent(&copy).unwrap(), InsertOutcome::Duplicate(a.id.clone()));
            assert_eq!(store.len().unwrap(), 1);
        }
    }

    #[test]
    fn invalid_articles_rejected_on_write() {
        for store in stores() {
            let mut a = article(1);
            a.body.clear();
            assert!(matches!(store.insert_if_absent(&a), Err(StoreError::Invariant(_))));
        }
    }

    #[test]
    fn annotations_are_write_once() {
        for store in stores() {
            let a = article(1);
            store.insert_if_absent(&a).unwrap();
            let sports = Annotation::Section { label: SectionLabel::Sports };
            assert!(store.annotate(&a.id, &sports).unwrap());
            assert!(!store.annotate(&a.id, &sports).unwrap());
            let health = Annotation::Section { label: SectionLabel::Health };
            assert!(matches!(
                store.annotate(&a.id, &health),
                Err(StoreError::AnnotationConflict { .. })
            ));
            let bad = Annotation::Propaganda {
                result: PropagandaResult { index: 0.9, label: PropagandaLabel::Unlikely },
            };
            assert!(matches!(store.annotate(&a.id, &bad), Err(StoreError::Invariant(_))));
            assert_eq!(store.get(&a.id).unwrap().unwrap().section, Some(SectionLabel::Sports));
            assert!(store.get(&a.id).unwrap().unwrap().propaganda.is_none());
            assert!(matches!(
                store.annotate(&ArticleId::from("nope"), &sports),
                Err(StoreError::NotFound(_))
            ));
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let src = MemoryStore::new();
        for n in 0..5 {
            src.insert_if_absent(&article(n)).unwrap();
        }
        src.annotate(&article(3).id, &Annotation::Stance { claim_id: "c1".into(), label: StanceLabel::Agree })
            .unwrap();
        let mut buf = Vec::new();
        assert_eq!(export_jsonl(&src, &mut buf).unwrap(), 5);
        let dst = SqliteStore::in_memory().unwrap();
        assert_eq!(import_jsonl(&dst, buf.as_slice()).unwrap(), 5);
        assert_eq!(import_jsonl(&dst, buf.as_slice()).unwrap(), 0);
        assert_eq!(src.snapshot().unwrap(), dst.snapshot().unwrap());
        let mut again = Vec::new();
        export_jsonl(&dst, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn concurrent_inserts_deduplicate() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(SqliteStore::open(dir.path().join("a.db")).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let store = Arc::clone(&store);
                std::thread::spawn(move || {
                    (0..50)
                        .filter(|n| store.insert_if_absent(&article(*n)).unwrap() == InsertOutcome::Inserted)
                        .count()
                })
            })
            .collect();
        let total: usize = handles.into_iter().map(|h| h.join().unwrap()).sum();
        assert_eq!(total, 50);
        assert_eq!(store.len().unwrap(), 50);
    }
}
