use chrono::{DateTime, Duration, NaiveTime, Utc};

use super::ClusteringParams;
use crate::model::ArticleId;

/// One time window `[start, end)` and the articles published inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// Position counted from the anchor; window `k` starts `k · step` days after it.
    pub index: i64,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    /// In input order.
    pub article_ids: Vec<ArticleId>,
}

/// UTC midnight of the day containing `t`.
pub fn window_anchor(t: DateTime<Utc>) -> DateTime<Utc> {
    t.date_naive().and_time(NaiveTime::MIN).and_utc()
}

pub fn window_bounds(anchor: DateTime<Utc>, index: i64, params: &ClusteringParams) -> (DateTime<Utc>, DateTime<Utc>) {
    let start = anchor + Duration::days(index * i64::from(params.step_days()));
    (start, start + Duration::days(i64::from(params.window_days)))
}

/// Indices of every window whose span contains `t`.
pub fn windows_containing(
    anchor: DateTime<Utc>,
    t: DateTime<Utc>,
    params: &ClusteringParams,
) -> std::ops::RangeInclusive<i64> {
    let step = i64::from(params.step_days()) * 86_400;
    let len = i64::from(params.window_days) * 86_400;
    let offset = (t - anchor).num_seconds();
    // k·step ≤ offset < k·step + len
    let last = offset.div_euclid(step);
    let first = (offset - len).div_euclid(step) + 1;
    first.max(0)..=last
}

/// Splits articles into overlapping windows anchored at the UTC midnight of
/// the earliest article. Windows that would be empty are omitted.
pub fn make_windows(articles: &[(ArticleId, DateTime<Utc>)], params: &ClusteringParams) -> Vec<Window> {
    let Some(earliest) = articles.iter().map(|a| a.1).min() else {
        return Vec::new();
    };
    make_windows_from(window_anchor(earliest), articles, params)
}

/// [`make_windows`] with an explicit anchor; articles before it are ignored.
pub fn make_windows_from(
    anchor: DateTime<Utc>,
    articles: &[(ArticleId, DateTime<Utc>)],
    params: &ClusteringParams,
) -> Vec<Window> {
    let mut windows: std::collections::BTreeMap<i64, Vec<ArticleId>> = Default::default();
    for (id, t) in articles {
        if *t < anchor {
            continue;
        }
        for k in windows_containing(anchor, *t, params) {
            windows.entry(k).or_default().push(id.clone());
        }
    }
    windows
        .into_iter()
        .map(|(index, article_ids)| {
            let (start, end) = window_bounds(anchor, index, params);
            Window {
                index,
                start,
                end,
                article_ids,
            }
        })
        .collect()
}
