//! The article-level stages: fetch → extract/dedup → translate → categorize
//! → propaganda → frame → stance → store-annotate.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use newsdesk_core::classifiers::{
    categorize_section, classify_frame, classify_stance, propaganda_score, ClassifierError, FramePlugin,
    KeywordFrameBaseline, LinearModel, StanceClassifier,
};
use newsdesk_core::ingest::{
    Annotation, ArticleStore, ContentExtractor, FeedSource, IdentityTranslator, Ingestor, InsertOutcome, RawDocument,
    Translator,
};
use newsdesk_core::profiles::Claim;
use newsdesk_core::{Article, ArticleId, Language};
use serde::{Deserialize, Serialize};

use crate::fetch::{FetchRequest, Fetcher};
use crate::stage::{json_handler, StageDescriptor};
use crate::topics;

/// Text produced by the translation slot when it actually translated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedText {
    pub language: Language,
    pub title: String,
    pub body: String,
}

/// An article travelling between analysis stages, annotations filled in as it goes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleMessage {
    pub article: Article,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<TranslatedText>,
}

/// Models and plugins used by the analysis stages. A missing model leaves
/// its annotation unset.
pub struct Analyzers {
    pub section: Option<LinearModel>,
    pub propaganda: Option<LinearModel>,
    pub frame: Box<dyn FramePlugin>,
    pub stance: StanceClassifier,
    pub claims: Vec<Claim>,
    pub translator: Box<dyn Translator>,
    pub target_language: Language,
}

impl Default for Analyzers {
    fn default() -> Self {
        Analyzers {
            section: None,
            propaganda: None,
            frame: Box::new(KeywordFrameBaseline::default()),
            stance: StanceClassifier::default(),
            claims: Vec::new(),
            translator: Box::new(IdentityTranslator),
            target_language: Language::En,
        }
    }
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Clone)]
pub struct StageContext {
    pub store: Arc<dyn ArticleStore>,
    pub extractor: Arc<dyn ContentExtractor>,
    pub feeds: Arc<HashMap<String, FeedSource>>,
    pub fetcher: Arc<dyn Fetcher>,
    pub analyzers: Arc<Analyzers>,
    pub clock: Clock,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn fetch(ctx: &StageContext, req: FetchRequest) -> Result<Vec<RawDocument>, String> {
    if !ctx.feeds.contains_key(&req.source_id) {
        return Err(format!("unknown source `{}`", req.source_id));
    }
    let body = ctx.fetcher.get(&req.url).map_err(err)?;
    Ok(vec![RawDocument {
        fetch_url: req.url,
        fetched_at: (ctx.clock)(),
        body_html: String::from_utf8_lossy(&body).into_owned(),
        source_id: req.source_id,
        feed_title: req.feed_title,
        feed_published_at: req.feed_published_at,
    }])
}

/// Inserts the article unless it is known. A re-delivered document (same
/// canonical URL) passes on the stored copy without annotations, so later
/// stages recompute the same values; a different URL with the same content
/// is dropped here.
fn extract(ctx: &StageContext, doc: RawDocument) -> Result<Vec<ArticleMessage>, String> {
    let ingestor = Ingestor {
        extractor: ctx.extractor.as_ref(),
        store: ctx.store.as_ref(),
        sources: &ctx.feeds,
    };
    let article = ingestor.prepare(&doc).map_err(err)?;
    let article = match ctx.store.insert_if_absent(&article).map_err(err)? {
        InsertOutcome::Inserted => article,
        InsertOutcome::Duplicate(existing) if existing == article.id => {
            let stored = ctx.store.get(&existing).map_err(err)?.ok_or("article vanished from the store")?;
            Article::new(
                stored.canonical_url,
                stored.medium_id,
                stored.title,
                stored.body,
                stored.language,
                stored.published_at,
            )
        }
        InsertOutcome::Duplicate(other) => {
            log::debug!("{} duplicates {other}", article.canonical_url);
            return Ok(Vec::new());
        }
    };
    Ok(vec![ArticleMessage { article, translation: None }])
}

fn translate(ctx: &StageContext, mut msg: ArticleMessage) -> Result<Vec<ArticleMessage>, String> {
    let a = &ctx.analyzers;
    let from = msg.article.language;
    if from != a.target_language {
        let title = a.translator.translate(&msg.article.title, from, a.target_language);
        let body = a.translator.translate(&msg.article.body, from, a.target_language);
        if title.language == a.target_language && body.language == a.target_language {
            msg.translation = Some(TranslatedText {
                language: a.target_language,
                title: title.text,
                body: body.text,
            });
        }
    }
    Ok(vec![msg])
}

fn categorize(ctx: &StageContext, mut msg: ArticleMessage) -> Result<Vec<ArticleMessage>, String> {
    if let Some(model) = &ctx.analyzers.section {
        msg.article.section = Some(categorize_section(&msg.article, model).map_err(err)?);
    }
    Ok(vec![msg])
}

fn propaganda(ctx: &StageContext, mut msg: ArticleMessage) -> Result<Vec<ArticleMessage>, String> {
    if let Some(model) = &ctx.analyzers.propaganda {
        msg.article.propaganda = Some(propaganda_score(&msg.article, model).map_err(err)?);
    }
    Ok(vec![msg])
}

fn frame(ctx: &StageContext, mut msg: ArticleMessage) -> Result<Vec<ArticleMessage>, String> {
    msg.article.frame_distribution = Some(classify_frame(&msg.article.body, ctx.analyzers.frame.as_ref()));
    Ok(vec![msg])
}

fn stance(ctx: &StageContext, mut msg: ArticleMessage) -> Result<Vec<ArticleMessage>, String> {
    for claim in &ctx.analyzers.claims {
        match classify_stance(&msg.article.body, &claim.text, &ctx.analyzers.stance) {
            Ok(label) => {
                msg.article.stances.insert(claim.claim_id.clone(), label);
            }
            Err(ClassifierError::NoStanceBackend) => break,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(vec![msg])
}

/// Writes every annotation the message carries; each is write-once, so a
/// re-delivery is a no-op.
fn store_annotate(ctx: &StageContext, msg: ArticleMessage) -> Result<Vec<ArticleId>, String> {
    let a = &msg.article;
    let mut annotations = Vec::new();
    if let Some(label) = a.section {
        annotations.push(Annotation::Section { label });
    }
    if let Some(result) = a.propaganda {
        annotations.push(Annotation::Propaganda { result });
    }
    if let Some(distribution) = &a.frame_distribution {
        annotations.push(Annotation::Frame {
            distribution: distribution.clone(),
        });
    }
    for (claim_id, label) in &a.stances {
        annotations.push(Annotation::Stance {
            claim_id: claim_id.clone(),
            label: *label,
        });
    }
    for annotation in &annotations {
        ctx.store.annotate(&a.id, annotation).map_err(err)?;
    }
    Ok(vec![a.id.clone()])
}

type StageFn<I, O> = fn(&StageContext, I) -> Result<Vec<O>, String>;

fn descriptor<I, O>(ctx: &StageContext, name: &str, f: StageFn<I, O>, parallelism: usize) -> StageDescriptor
where
    I: serde::de::DeserializeOwned + 'static,
    O: Serialize + 'static,
{
    let (input, output) = topics::stage_topics(name).expect("known stage");
    let ctx = ctx.clone();
    StageDescriptor {
        name: name.to_owned(),
        input: input.to_owned(),
        output: Some(output.to_owned()),
        handler: json_handler(move |i: I| f(&ctx, i)),
        parallelism: parallelism.max(1),
    }
}

/// The eight article stages in pipeline order. Missing entries in
/// `parallelism` default to 1.
pub fn article_stages(ctx: &StageContext, parallelism: &BTreeMap<String, usize>) -> Vec<StageDescriptor> {
    let p = |name: &str| parallelism.get(name).copied().unwrap_or(1);
    vec![
        descriptor(ctx, topics::STAGE_FETCH, fetch, p(topics::STAGE_FETCH)),
        descriptor(ctx, topics::STAGE_EXTRACT, extract, p(topics::STAGE_EXTRACT)),
        descriptor(ctx, topics::STAGE_TRANSLATE, translate, p(topics::STAGE_TRANSLATE)),
        descriptor(ctx, topics::STAGE_CATEGORIZE, categorize, p(topics::STAGE_CATEGORIZE)),
        descriptor(ctx, topics::STAGE_PROPAGANDA, propaganda, p(topics::STAGE_PROPAGANDA)),
        descriptor(ctx, topics::STAGE_FRAME, frame, p(topics::STAGE_FRAME)),
        descriptor(ctx, topics::STAGE_STANCE, stance, p(topics::STAGE_STANCE)),
        descriptor(ctx, topics::STAGE_STORE, store_annotate, p(topics::STAGE_STORE)),
    ]
}
