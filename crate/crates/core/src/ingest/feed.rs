use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};
use url::Url;

use super::canonical::resolve_link;
use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedKind {
    Rss,
    Atom,
    ListPage,
}

impl FromStr for FeedKind {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rss" => Ok(FeedKind::Rss),
            "atom" => Ok(FeedKind::Atom),
            "list-page" => Ok(FeedKind::ListPage),
            other => Err(IngestError::UnsupportedKind(other.to_owned())),
        }
    }
}

impl fmt::Display for FeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedKind::Rss => "rss",
            FeedKind::Atom => "atom",
            FeedKind::ListPage => "list-page",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedEntry {
    pub title: String,
    pub link: Url,
    pub published_at: Option<DateTime<Utc>>,
}

/// Parses a fetched feed document into its entries, resolving links against `feed_url`.
///
/// RSS 2.0, RSS 1.0 (RDF) and Atom are recognised by their root element, so a
/// source declared as `rss` that actually serves Atom still parses. Items
/// without a usable link are skipped.
pub fn parse_feed(raw: &[u8], kind: FeedKind, feed_url: &Url) -> Result<Vec<FeedEntry>, IngestError> {
    match kind {
        FeedKind::Rss | FeedKind::Atom => parse_xml_feed(raw, feed_url),
        FeedKind::ListPage => parse_list_page(raw, feed_url),
    }
}

#[derive(Default)]
struct PendingEntry {
    title: String,
    link: Option<String>,
    guid: Option<String>,
    date: Option<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Title,
    Link,
    Guid,
    Date,
}

fn parse_error(offset: u64, message: impl Into<String>) -> IngestError {
    IngestError::Parse {
        offset,
        message: message.into(),
    }
}

fn parse_xml_feed(raw: &[u8], feed_url: &Url) -> Result<Vec<FeedEntry>, IngestError> {
    let mut reader = Reader::from_reader(raw);
    reader.config_mut().trim_text(false);

    let mut entries = Vec::new();
    let mut depth = 0usize;
    let mut saw_root = false;
    let mut is_atom = false;
    let mut entry_depth: Option<usize> = None;
    let mut pending = PendingEntry::default();
    // field being captured and the depth of its element
    let mut capture: Option<(Field, usize)> = None;
    let mut text = String::new();

    loop {
        let event = reader
            .read_event()
            .map_err(|e| parse_error(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(start) => {
                depth += 1;
                let name = local_name(&start);
                if !saw_root {
                    saw_root = true;
                    is_atom = match name.as_str() {
                        "feed" => true,
                        "rss" | "RDF" => false,
                        other => {
                            return Err(parse_error(
                                reader.buffer_position(),
                                format!("unexpected root element <{other}>"),
                            ))
                        }
                    };
                    continue;
                }
                let item_tag = if is_atom { "entry" } else { "item" };
                if entry_depth.is_none() && name == item_tag {
                    entry_depth = Some(depth);
                    pending = PendingEntry::default();
                } else if entry_depth == Some(depth - 1) && capture.is_none() {
                    if let Some(field) = field_for(&name, is_atom) {
                        if field == Field::Link && is_atom {
                            atom_link(&start, &mut pending);
                        } else {
                            capture = Some((field, depth));
                            text.clear();
                        }
                    }
                }
            }
            Event::Empty(start) => {
                if is_atom && entry_depth == Some(depth) && local_name(&start) == "link" {
                    atom_link(&start, &mut pending);
                }
            }
            Event::End(_) => {
                if let Some((field, d)) = capture {
                    if d == depth {
                        let value = text.trim().to_owned();
                        match field {
                            Field::Title => pending.title = value,
                            Field::Link => {
                                if !value.is_empty() {
                                    pending.link = Some(value)
                                }
                            }
                            Field::Guid => pending.guid = Some(value),
                            Field::Date => {
                                if pending.date.is_none() {
                                    pending.date = Some(value)
                                }
                            }
                        }
                        capture = None;
                    }
                }
                if entry_depth == Some(depth) {
                    entry_depth = None;
                    let done = std::mem::take(&mut pending);
                    if let Some(entry) = finish_entry(done, feed_url) {
                        entries.push(entry);
                    }
                }
                depth = depth.saturating_sub(1);
            }
            Event::Text(t) => {
                if capture.is_some() {
                    text.push_str(&t.xml10_content());
                }
            }
            Event::CData(c) => {
                if capture.is_some() {
                    text.push_str(&c.into_inner());
                }
            }
            Event::GeneralRef(r) => {
                if capture.is_some() {
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(ch)) => ch.to_string(),
                        Ok(None) => quick_xml::escape::resolve_predefined_entity(&r)
                            .map(str::to_owned)
                            .unwrap_or_default(),
                        Err(e) => return Err(parse_error(reader.buffer_position(), e.to_string())),
                    };
                    text.push_str(&resolved);
                }
            }
            Event::Eof => {
                if !saw_root {
                    return Err(parse_error(reader.buffer_position(), "document has no root element"));
                }
                if depth != 0 {
                    return Err(parse_error(reader.buffer_position(), "unexpected end of document"));
                }
                break;
            }
            _ => {}
        }
    }
    Ok(entries)
}

fn local_name(start: &BytesStart<'_>) -> String {
    start.local_name().as_ref().to_owned()
}

fn field_for(name: &str, is_atom: bool) -> Option<Field> {
    match (name, is_atom) {
        ("title", _) => Some(Field::Title),
        ("link", _) => Some(Field::Link),
        ("guid", false) => Some(Field::Guid),
        ("pubDate" | "date", false) => Some(Field::Date),
        ("published" | "updated", true) => Some(Field::Date),
        _ => None,
    }
}

fn atom_link(start: &BytesStart<'_>, pending: &mut PendingEntry) {
    let mut href = None;
    let mut rel = None;
    for attr in start.attributes().flatten() {
        let value = attr.normalized_value(quick_xml::XmlVersion::Implicit1_0).map(|v| v.into_owned()).unwrap_or_default();
        match attr.key.local_name().as_ref() {
            "href" => href = Some(value),
            "rel" => rel = Some(value),
            _ => {}
        }
    }
    let alternate = rel.as_deref().is_none_or(|r| r == "alternate");
    if let Some(href) = href {
        if alternate && pending.link.is_none() {
            pending.link = Some(href);
        }
    }
}

fn finish_entry(pending: PendingEntry, feed_url: &Url) -> Option<FeedEntry> {
    let link = pending.link.or(pending.guid)?;
    let link = resolve_link(feed_url, &link).ok()?;
    Some(FeedEntry {
        title: pending.title,
        link,
        published_at: pending.date.as_deref().and_then(parse_date),
    })
}

/// Accepts the RFC 2822 dates of RSS and the RFC 3339 dates of Atom and Dublin Core.
pub fn parse_date(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    DateTime::parse_from_rfc2822(raw)
        .or_else(|_| DateTime::parse_from_rfc3339(raw))
        .map(|d| d.with_timezone(&Utc))
        .ok()
}

/// Article links on a section/list page: same-host anchors whose path looks
/// like an article slug (contains a hyphen or digit, or ends in .htm/.html).
fn parse_list_page(raw: &[u8], page_url: &Url) -> Result<Vec<FeedEntry>, IngestError> {
    let html = std::str::from_utf8(raw)
        .map_err(|e| parse_error(e.valid_up_to() as u64, "list page is not valid UTF-8"))?;
    let doc = Html::parse_document(html);
    let anchors = Selector::parse("a[href]").expect("static selector");
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::new();
    for a in doc.select(&anchors) {
        let Some(href) = a.value().attr("href") else { continue };
        let Ok(mut link) = resolve_link(page_url, href) else { continue };
        link.set_fragment(None);
        if link.host_str() != page_url.host_str() || link.path() == page_url.path() {
            continue;
        }
        let last = link.path_segments().and_then(|mut s| s.next_back()).unwrap_or("");
        let looks_like_article = last.contains('-')
            || last.chars().any(|c| c.is_ascii_digit())
            || last.ends_with(".html")
            || last.ends_with(".htm");
        let title = a.text().collect::<Vec<_>>().join(" ");
        let title = title.split_whitespace().collect::<Vec<_>>().join(" ");
        if !looks_like_article || title.is_empty() || !seen.insert(link.clone()) {
            continue;
        }
        entries.push(FeedEntry {
            title,
            link,
            published_at: None,
        });
    }
    Ok(entries)
}
