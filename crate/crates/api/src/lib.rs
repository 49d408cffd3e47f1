//! Read-only JSON API under `/v1` for the newsdesk reader UI.
//!
//! Handlers read an immutable [`Snapshot`]; [`ApiState::replace`] swaps in a
//! new one atomically, so a request never sees half of an update.

pub mod error;
pub mod search;
pub mod snapshot;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::routing::get;
use axum::{Json, Router};
use newsdesk_core::profiles::{MediaProfile, TopicStats};
use newsdesk_core::{Article, ArticleId, Language, MediaSource, MediumId};
use serde::{Deserialize, Serialize};
use tower_http::catch_panic::CatchPanicLayer;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorCode};
pub use search::{search, MatchKind, SearchHit, SearchType};
pub use snapshot::{ArticleSummary, MediumRef, Snapshot, SnapshotError, StoryCard};

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 100;
pub const RECENT_ARTICLES: usize = 20;
pub const RECENT_STORIES: usize = 10;

/// The response schema, checked in next to the crate.
pub const OPENAPI: &str = include_str!("../openapi.json");

#[derive(Debug, Default)]
pub struct ApiState {
    snapshot: RwLock<Arc<Snapshot>>,
}

impl ApiState {
    pub fn new(snapshot: Snapshot) -> Self {
        ApiState {
            snapshot: RwLock::new(Arc::new(snapshot)),
        }
    }

    pub fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap().clone()
    }

    pub fn replace(&self, snapshot: Snapshot) {
        *self.snapshot.write().unwrap() = Arc::new(snapshot);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoriesPage {
    pub items: Vec<StoryCard>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    /// Requested display language. Articles carry their own `language`; with
    /// no stored translations they are served as written.
    pub lang: Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumPage {
    pub medium: MediaSource,
    pub profile: Option<MediaProfile>,
    pub recent_articles: Vec<ArticleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicPage {
    pub topic: TopicStats,
    pub recent_stories: Vec<StoryCard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResults {
    pub query: String,
    #[serde(rename = "type")]
    pub kind: Option<SearchType>,
    pub items: Vec<SearchHit>,
}

type Params = Query<HashMap<String, String>>;
type Shared = State<Arc<ApiState>>;

fn positive(params: &HashMap<String, String>, key: &str, default: usize) -> Result<usize, ApiError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| ApiError::bad_request(format!("`{key}` must be a positive integer, got `{v}`"))),
    }
}

async fn stories(State(state): Shared, Query(params): Params) -> Result<Json<StoriesPage>, ApiError> {
    let lang = match params.get("lang").map(String::as_str) {
        None => Language::En,
        Some(l) => l
            .parse()
            .map_err(|_| ApiError::bad_request(format!("unsupported lang `{l}`; expected en or ar")))?,
    };
    let page = positive(&params, "page", 1)?;
    let page_size = positive(&params, "page_size", DEFAULT_PAGE_SIZE)?;
    if page_size > MAX_PAGE_SIZE {
        return Err(ApiError::bad_request(format!("page_size must be at most {MAX_PAGE_SIZE}")));
    }
    let snap = state.current();
    let cards = snap.cards();
    let items = cards
        .iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .cloned()
        .collect();
    Ok(Json(StoriesPage {
        items,
        total: cards.len(),
        page,
        page_size,
        lang,
    }))
}

async fn medium(State(state): Shared, UrlPath(id): UrlPath<String>) -> Result<Json<MediumPage>, ApiError> {
    let snap = state.current();
    let id = MediumId(id);
    let medium = snap
        .medium(&id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no medium `{id}`")))?;
    let recent_articles = snap.articles_of(&id).take(RECENT_ARTICLES).map(|a| snap.summary(a)).collect();
    Ok(Json(MediumPage {
        medium,
        profile: snap.profile(&id).cloned(),
        recent_articles,
    }))
}

async fn topic(State(state): Shared, UrlPath(slug): UrlPath<String>) -> Result<Json<TopicPage>, ApiError> {
    let snap = state.current();
    let stats = snap
        .topic(&slug)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no topic `{slug}`")))?;
    let recent_stories = stats
        .story_ids
        .iter()
        .filter_map(|&id| snap.card(id).cloned())
        .take(RECENT_STORIES)
        .collect();
    Ok(Json(TopicPage {
        topic: stats,
        recent_stories,
    }))
}

async fn search_handler(State(state): Shared, Query(params): Params) -> Result<Json<SearchResults>, ApiError> {
    let query = params.get("q").map(|q| q.trim()).unwrap_or_default();
    if query.is_empty() {
        return Err(ApiError::bad_request("`q` must not be empty"));
    }
    let kind = match params.get("type").map(String::as_str) {
        None | Some("") => None,
        Some("media") => Some(SearchType::Media),
        Some("topics") => Some(SearchType::Topics),
        Some(other) => {
            return Err(ApiError::bad_request(format!("unsupported type `{other}`; expected media or topics")))
        }
    };
    let items = search(&state.current(), query, kind);
    Ok(Json(SearchResults {
        query: query.to_owned(),
        kind,
        items,
    }))
}

async fn article(State(state): Shared, UrlPath(id): UrlPath<String>) -> Result<Json<Article>, ApiError> {
    let snap = state.current();
    let id = ArticleId::from(id.as_str());
    snap.article(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no article `{id}`")))
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

fn panic_response(_: Box<dyn std::any::Any + Send + 'static>) -> axum::response::Response {
    use axum::response::IntoResponse;
    ApiError::internal("internal error").into_response()
}

fn routes(state: Arc<ApiState>) -> Router<()> {
    Router::new()
        .route("/v1/stories", get(stories))
        .route("/v1/media/{id}", get(medium))
        .route("/v1/topics/{slug}", get(topic))
        .route("/v1/search", get(search_handler))
        .route("/v1/articles/{id}", get(article))
        .route("/v1/openapi.json", get(|| async { ([("content-type", "application/json")], OPENAPI) }))
        .route("/v1/{*rest}", get(not_found))
        .with_state(state)
}

fn layered(app: Router) -> Router {
    app.layer(CatchPanicLayer::custom(panic_response)).layer(CorsLayer::permissive())
}

/// The `/v1` routes with permissive CORS.
pub fn router(state: Arc<ApiState>) -> Router {
    layered(routes(state).fallback(not_found))
}

/// [`router`] plus static files (the built web UI) for paths outside `/v1`.
pub fn router_with_static(state: Arc<ApiState>, static_dir: &Path) -> Router {
    layered(routes(state).fallback_service(ServeDir::new(static_dir)))
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    addr: SocketAddr,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
