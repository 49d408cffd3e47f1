//! Fixture store and golden-response cases, shared with the acceptance run.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{DateTime, Utc};
use http_body_util::BodyExt;
use newsdesk_api::{router, ApiState, Snapshot, OPENAPI};
use newsdesk_core::classifiers::{propaganda_label, SourceLabels};
use newsdesk_core::clustering::Story;
use newsdesk_core::profiles::{
    build_all_profiles, build_topic_stats, CitationTable, Claim, CitationRow, ProfileConfig, ProfileInputs, TopicDef,
    UserGroup,
};
use newsdesk_core::publish::{PublishedProfiles, PublishedStories};
use newsdesk_core::{
    Article, ArticleId, Bias, Factuality, FrameLabel, Language, MediaSource, MediumId, PropagandaResult, SectionLabel,
    StanceLabel,
};
use serde::Deserialize;
use serde_json::Value;
use tower::ServiceExt;
use url::Url;

#[derive(Deserialize)]
struct ArticleSpec {
    url: Url,
    medium: MediumId,
    language: Language,
    published_at: DateTime<Utc>,
    title: String,
    body: String,
    propaganda: Option<f64>,
    section: Option<SectionLabel>,
    frames: Option<BTreeMap<FrameLabel, f64>>,
    #[serde(default)]
    stances: BTreeMap<String, StanceLabel>,
}

#[derive(Deserialize)]
struct StorySpec {
    id: u64,
    title: String,
    representative: Url,
    urls: Vec<Url>,
}

#[derive(Deserialize)]
struct Fixture {
    media: Vec<MediaSource>,
    articles: Vec<ArticleSpec>,
    stories: Vec<StorySpec>,
    topics: Vec<TopicDef>,
    claims: Vec<Claim>,
}

pub fn fixture_snapshot(fixture: &Path) -> Snapshot {
    let f: Fixture = serde_json::from_slice(&std::fs::read(fixture).unwrap()).unwrap();
    let articles: Vec<Article> = f
        .articles
        .into_iter()
        .map(|s| {
            let mut a = Article::new(s.url, s.medium, s.title, s.body, s.language, s.published_at);
            a.propaganda = s.propaganda.map(|index| PropagandaResult {
                index,
                label: propaganda_label(index).unwrap(),
            });
            a.section = s.section;
            a.frame_distribution = s.frames;
            a.stances = s.stances;
            a.validate().unwrap();
            a
        })
        .collect();
    let stories: Vec<Story> = f
        .stories
        .into_iter()
        .map(|s| Story {
            id: s.id,
            topic_ids: [s.id].into(),
            article_ids: s.urls.iter().map(ArticleId::for_url).collect(),
            representative: ArticleId::for_url(&s.representative),
            title: s.title,
        })
        .collect();
    let media: BTreeMap<MediumId, MediaSource> = f.media.into_iter().map(|m| (m.id.clone(), m)).collect();
    let topics: BTreeMap<String, TopicDef> = f.topics.into_iter().map(|t| (t.slug.clone(), t)).collect();
    let labels = BTreeMap::from([(
        MediumId::from("global-wire"),
        SourceLabels {
            factuality: Some(Factuality::High),
            bias: Some(Bias::CenterLeft),
        },
    )]);
    let mut citations = CitationTable::default();
    for (user, group, medium, count) in [
        ("u1", UserGroup::Right, "daily-herald", 9),
        ("u2", UserGroup::Left, "daily-herald", 3),
        ("u3", UserGroup::Left, "global-wire", 12),
        ("u4", UserGroup::Right, "global-wire", 4),
    ] {
        citations.add(&CitationRow {
            user_id: user.into(),
            group,
            medium_id: MediumId::from(medium),
            topic_id: "floods".into(),
            count,
        });
    }
    let config = ProfileConfig::default();
    let inputs = ProfileInputs {
        media: &media,
        claims: &f.claims,
        citations: &citations,
        labels: &labels,
        classifier: None,
        config: &config,
    };
    let profiles = build_all_profiles(&articles, &inputs).unwrap();
    let by_id: BTreeMap<ArticleId, Article> = articles.iter().map(|a| (a.id.clone(), a.clone())).collect();
    let topic_stats = topics
        .keys()
        .map(|slug| (slug.clone(), build_topic_stats(slug, &topics, &stories, &by_id, &media).unwrap()))
        .collect();
    let published = PublishedStories {
        generated_at: Some("2024-05-03T09:00:00Z".parse().unwrap()),
        stories,
    };
    let profiles = PublishedProfiles {
        generated_at: Some("2024-05-04T00:00:00Z".parse().unwrap()),
        media,
        profiles,
        topic_defs: topics,
        topics: topic_stats,
        claims: f.claims,
    };
    Snapshot::build(articles, &published, profiles)
}

pub fn app(snapshot: Snapshot) -> Router {
    router(Arc::new(ApiState::new(snapshot)))
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let response = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

/// Validates `value` against a component schema of the checked-in OpenAPI document.
pub fn schema_errors(component: &str, value: &Value) -> Vec<String> {
    let mut doc: Value = serde_json::from_str(OPENAPI).unwrap();
    doc["$schema"] = "https://json-schema.org/draft/2020-12/schema".into();
    doc["$ref"] = format!("#/components/schemas/{component}").into();
    let validator = jsonschema::validator_for(&doc).unwrap();
    validator.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

pub struct Case {
    pub name: &'static str,
    pub uri: String,
    pub status: StatusCode,
    pub schema: &'static str,
}

fn case(name: &'static str, uri: impl Into<String>, status: StatusCode, schema: &'static str) -> Case {
    Case {
        name,
        uri: uri.into(),
        status,
        schema,
    }
}

pub fn cases() -> Vec<Case> {
    let flood = ArticleId::for_url(&Url::parse("https://dailyherald.example/news/flood-outrage").unwrap());
    vec![
        case("stories", "/v1/stories", StatusCode::OK, "StoriesPage"),
        case("stories_ar_page2", "/v1/stories?lang=ar&page=2&page_size=1", StatusCode::OK, "StoriesPage"),
        case("stories_beyond", "/v1/stories?page=5&page_size=10", StatusCode::OK, "StoriesPage"),
        case("stories_bad_lang", "/v1/stories?lang=fr", StatusCode::BAD_REQUEST, "ApiError"),
        case("stories_page_size_cap", "/v1/stories?page_size=101", StatusCode::BAD_REQUEST, "ApiError"),
        case("stories_page_zero", "/v1/stories?page=0", StatusCode::BAD_REQUEST, "ApiError"),
        case("media", "/v1/media/global-wire", StatusCode::OK, "MediumPage"),
        case("media_herald", "/v1/media/daily-herald", StatusCode::OK, "MediumPage"),
        case("media_unknown", "/v1/media/nowhere-news", StatusCode::NOT_FOUND, "ApiError"),
        case("topic", "/v1/topics/floods", StatusCode::OK, "TopicPage"),
        case("topic_empty", "/v1/topics/global-health", StatusCode::OK, "TopicPage"),
        case("topic_unknown", "/v1/topics/volcanoes", StatusCode::NOT_FOUND, "ApiError"),
        case("search", "/v1/search?q=gl", StatusCode::OK, "SearchResults"),
        case("search_media", "/v1/search?q=HERALD&type=media", StatusCode::OK, "SearchResults"),
        case("search_empty", "/v1/search?q=%20", StatusCode::BAD_REQUEST, "ApiError"),
        case("search_bad_type", "/v1/search?q=a&type=people", StatusCode::BAD_REQUEST, "ApiError"),
        case("article", format!("/v1/articles/{flood}"), StatusCode::OK, "Article"),
        case("article_unknown", "/v1/articles/0000000000000000", StatusCode::NOT_FOUND, "ApiError"),
        case("unknown_route", "/v1/nothing/here", StatusCode::NOT_FOUND, "ApiError"),
    ]
}

/// Runs every case against the fixture; with `update` the goldens are rewritten.
pub async fn run_cases(fixture: &Path, golden_dir: &Path, update: bool) -> Vec<(&'static str, Result<(), String>)> {
    let app = app(fixture_snapshot(fixture));
    let mut out = Vec::new();
    for c in cases() {
        let (status, body) = get(&app, &c.uri).await;
        let path = golden_dir.join(format!("{}.json", c.name));
        let result = (|| {
            if status != c.status {
                return Err(format!("{}: status {status}, expected {}", c.uri, c.status));
            }
            let errors = schema_errors(c.schema, &body);
            if !errors.is_empty() {
                return Err(format!("{}: schema {}: {}", c.uri, c.schema, errors.join("; ")));
            }
            if update {
                std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap() + "\n").unwrap();
            }
            let golden: Value = serde_json::from_slice(&std::fs::read(&path).map_err(|e| format!("{path:?}: {e}"))?)
                .map_err(|e| e.to_string())?;
            if golden != body {
                return Err(format!("{}: response differs from {path:?}", c.uri));
            }
            Ok(())
        })();
        out.push((c.name, result));
    }
    out
}
