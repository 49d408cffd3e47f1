//! Topic and stage names of the article pipeline.

pub const FETCH_REQUESTS: &str = "fetch-requests";
pub const RAW_DOCUMENTS: &str = "raw-documents";
pub const ARTICLES: &str = "articles";
pub const TRANSLATED: &str = "translated";
pub const CATEGORIZED: &str = "categorized";
pub const SCORED: &str = "scored";
pub const FRAMED: &str = "framed";
pub const STANCED: &str = "stanced";
/// Ids of articles whose annotations are stored; consumed by the clustering job.
pub const ANNOTATED: &str = "annotated";

pub const STAGE_FETCH: &str = "fetch";
pub const STAGE_EXTRACT: &str = "extract";
pub const STAGE_TRANSLATE: &str = "translate";
pub const STAGE_CATEGORIZE: &str = "categorize";
pub const STAGE_PROPAGANDA: &str = "propaganda";
pub const STAGE_FRAME: &str = "frame";
pub const STAGE_STANCE: &str = "stance";
pub const STAGE_STORE: &str = "store-annotate";

/// Consumer group of the clustering scheduler on [`ANNOTATED`].
pub const CLUSTERING_GROUP: &str = "clustering";

/// `(stage, input, output)` in pipeline order.
pub const STAGES: [(&str, &str, &str); 8] = [
    (STAGE_FETCH, FETCH_REQUESTS, RAW_DOCUMENTS),
    (STAGE_EXTRACT, RAW_DOCUMENTS, ARTICLES),
    (STAGE_TRANSLATE, ARTICLES, TRANSLATED),
    (STAGE_CATEGORIZE, TRANSLATED, CATEGORIZED),
    (STAGE_PROPAGANDA, CATEGORIZED, SCORED),
    (STAGE_FRAME, SCORED, FRAMED),
    (STAGE_STANCE, FRAMED, STANCED),
    (STAGE_STORE, STANCED, ANNOTATED),
];

pub fn stage_topics(stage: &str) -> Option<(&'static str, &'static str)> {
    STAGES.iter().find(|s| s.0 == stage).map(|s| (s.1, s.2))
}

/// Every topic the pipeline uses, dead-letter topics included.
pub fn all_topics() -> Vec<String> {
    let mut out: Vec<String> = vec![FETCH_REQUESTS.to_owned()];
    for (stage, _, output) in STAGES {
        out.push(output.to_owned());
        out.push(crate::stage::dead_letter_topic(stage));
    }
    out
}
