use chrono::{DateTime, Utc};
use scraper::{ElementRef, Html, Node, Selector};
use serde::{Deserialize, Serialize};
use url::Url;

use super::feed::parse_date;
use crate::model::Language;

/// A fetched article page, before extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub fetch_url: Url,
    pub fetched_at: DateTime<Utc>,
    pub body_html: String,
    pub source_id: String,
    /// Title announced by the feed entry, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_title: Option<String>,
    /// Publication time announced by the feed entry, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_published_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub title: String,
    pub body: String,
    pub published_at: Option<DateTime<Utc>>,
    pub canonical_url: Option<Url>,
    pub language: Option<Language>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot extract {url}: {reason}")]
pub struct ExtractError {
    pub url: String,
    pub reason: String,
}

/// Pulls title and body text out of an article page.
pub trait ContentExtractor: Send + Sync {
    fn extract(&self, doc: &RawDocument) -> Result<Extracted, ExtractError>;
}

/// Baseline extractor: the body is the longest run of sibling `<p>` elements.
#[derive(Debug, Default, Clone, Copy)]
pub struct ParagraphBlockExtractor;

fn selector(s: &str) -> Selector {
    Selector::parse(s).expect("static selector")
}

fn collapse(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn element_text(el: ElementRef<'_>) -> String {
    collapse(&el.text().collect::<String>())
}

fn meta_content(doc: &Html, css: &str) -> Option<String> {
    doc.select(&selector(css))
        .filter_map(|m| m.value().attr("content"))
        .map(collapse)
        .find(|s| !s.is_empty())
}

/// Paragraph runs: for every element, consecutive `<p>` children separated
/// only by whitespace form one block. Returns the block with the most text,
/// earliest in document order on ties.
fn largest_paragraph_block(doc: &Html) -> Vec<String> {
    let mut best: Vec<String> = Vec::new();
    let mut best_len = 0usize;
    for node in doc.tree.nodes() {
        if !node.value().is_element() {
            continue;
        }
        let mut run: Vec<String> = Vec::new();
        let mut run_len = 0usize;
        let mut flush = |run: &mut Vec<String>, run_len: &mut usize| {
            if *run_len > best_len {
                best_len = *run_len;
                best = std::mem::take(run);
            } else {
                run.clear();
            }
            *run_len = 0;
        };
        for child in node.children() {
            match child.value() {
                Node::Element(e) if e.name() == "p" => {
                    let text = ElementRef::wrap(child).map(element_text).unwrap_or_default();
                    if !text.is_empty() {
                        run_len += text.chars().count();
                        run.push(text);
                    }
                }
                Node::Text(t) if t.trim().is_empty() => {}
                Node::Comment(_) => {}
                _ => flush(&mut run, &mut run_len),
            }
        }
        flush(&mut run, &mut run_len);
    }
    best
}

impl ContentExtractor for ParagraphBlockExtractor {
    fn extract(&self, doc: &RawDocument) -> Result<Extracted, ExtractError> {
        let html = Html::parse_document(&doc.body_html);
        let fail = |reason: &str| ExtractError {
            url: doc.fetch_url.to_string(),
            reason: reason.to_owned(),
        };

        let title = meta_content(&html, r#"meta[property="og:title"]"#)
            .or_else(|| html.select(&selector("title")).map(element_text).find(|t| !t.is_empty()))
            .or_else(|| html.select(&selector("h1")).map(element_text).find(|t| !t.is_empty()))
            .or_else(|| doc.feed_title.clone().filter(|t| !t.trim().is_empty()))
            .ok_or_else(|| fail("no title"))?;

        let paragraphs = largest_paragraph_block(&html);
        if paragraphs.is_empty() {
            return Err(fail("no paragraph text"));
        }

        let published_at = meta_content(&html, r#"meta[property="article:published_time"]"#)
            .or_else(|| {
                html.select(&selector("time[datetime]"))
                    .filter_map(|t| t.value().attr("datetime"))
                    .map(str::to_owned)
                    .next()
            })
            .and_then(|raw| parse_date(&raw));

        let canonical_url = html
            .select(&selector(r#"link[rel="canonical"][href]"#))
            .filter_map(|l| l.value().attr("href"))
            .find_map(|href| doc.fetch_url.join(href).ok());

        let language = html
            .select(&selector("html[lang]"))
            .filter_map(|h| h.value().attr("lang"))
            .find_map(|lang| match lang.get(..2).map(str::to_ascii_lowercase).as_deref() {
                Some("en") => Some(Language::En),
                Some("ar") => Some(Language::Ar),
                _ => None,
            });

        Ok(Extracted {
            title,
            body: paragraphs.join("\n\n"),
            published_at,
            canonical_url,
            language,
        })
    }
}
