use url::Url;

use super::IngestError;

const TRACKING_KEYS: &[&str] = &["fbclid", "gclid"];

fn is_tracking(key: &str) -> bool {
    key.starts_with("utm_") || TRACKING_KEYS.contains(&key)
}

/// Normalizes an absolute URL so that trivially different links to the same
/// article compare equal.
///
/// Scheme and host are lowercased and the default port dropped (the `url`
/// parser already does both), the fragment and tracking parameters are removed
/// and the remaining query parameters are sorted by key.
pub fn canonicalize_url(url: &str) -> Result<Url, IngestError> {
    let mut parsed = Url::parse(url.trim()).map_err(|e| IngestError::InvalidUrl {
        url: url.to_owned(),
        reason: e.to_string(),
    })?;
    if parsed.cannot_be_a_base() {
        return Err(IngestError::InvalidUrl {
            url: url.to_owned(),
            reason: "not a hierarchical URL".into(),
        });
    }
    parsed.set_fragment(None);

    let mut pairs: Vec<(String, String)> = parsed
        .query_pairs()
        .filter(|(k, _)| !is_tracking(k))
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    if pairs.is_empty() {
        parsed.set_query(None);
    } else {
        parsed.query_pairs_mut().clear().extend_pairs(pairs);
    }
    Ok(parsed)
}

/// Resolves a possibly relative link against the URL it was found at.
pub fn resolve_link(base: &Url, link: &str) -> Result<Url, IngestError> {
    base.join(link.trim()).map_err(|e| IngestError::InvalidUrl {
        url: link.to_owned(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scheme_host_port_fragment() {
        assert_eq!(
            canonicalize_url("HTTPS://X.COM:443/a#frag").unwrap().as_str(),
            "https://x.com/a"
        );
    }

    #[test]
    fn tracking_params_removed_and_sorted() {
        assert_eq!(
            canonicalize_url("https://x.com/a?utm_source=t&b=2&a=1")
                .unwrap()
                .as_str(),
            "https://x.com/a?a=1&b=2"
        );
        assert_eq!(
            canonicalize_url("https://x.com/a?fbclid=1&gclid=2").unwrap().as_str(),
            "https://x.com/a"
        );
    }

    #[test]
    fn already_canonical_is_unchanged() {
        assert_eq!(canonicalize_url("https://x.com/a").unwrap().as_str(), "https://x.com/a");
    }

    #[test]
    fn relative_or_garbage_rejected() {
        assert!(matches!(canonicalize_url("/a"), Err(IngestError::InvalidUrl { .. })));
        assert!(matches!(canonicalize_url("mailto:a@b.c"), Err(IngestError::InvalidUrl { .. })));
    }

    #[test]
    fn relative_link_resolution() {
        let base = Url::parse("https://x.y/feed").unwrap();
        assert_eq!(resolve_link(&base, "/a").unwrap().as_str(), "https://x.y/a");
        assert_eq!(resolve_link(&base, "b/c").unwrap().as_str(), "https://x.y/b/c");
        let nested = Url::parse("https://x.y/news/rss/feed.xml").unwrap();
        assert_eq!(resolve_link(&nested, "../a?q=1").unwrap().as_str(), "https://x.y/news/a?q=1");
        assert_eq!(resolve_link(&nested, "//z.w/p").unwrap().as_str(), "https://z.w/p");
    }

    proptest! {
        #[test]
        fn idempotent(
            host in "[a-zA-Z]{1,8}\\.(com|org|NET)",
            path in "(/[a-zA-Z0-9%._~-]{0,6}){0,3}",
            query in proptest::collection::vec(("(utm_[a-z]{1,3}|[a-z]{1,3}|fbclid)", "[a-zA-Z0-9 %+&=]{0,4}"), 0..4),
            frag in proptest::option::of("[a-z]{0,4}"),
            port in proptest::option::of(prop_oneof![Just(443u16), Just(8080u16)]),
        ) {
            let mut raw = format!("HTTPS://{host}");
            if let Some(p) = port { raw.push_str(&format!(":{p}")); }
            raw.push_str(&path);
            if !query.is_empty() {
                let q: Vec<String> = query.iter().map(|(k, v)| format!("{k}={v}")).collect();
                raw.push('?');
                raw.push_str(&q.join("&"));
            }
            if let Some(f) = frag { raw.push('#'); raw.push_str(&f); }
            if let Ok(once) = canonicalize_url(&raw) {
                let twice = canonicalize_url(once.as_str()).unwrap();
                prop_assert_eq!(once.as_str(), twice.as_str());
                prop_assert!(once.fragment().is_none());
                prop_assert!(!once.as_str().contains("utm_"));
            }
        }
    }
}
