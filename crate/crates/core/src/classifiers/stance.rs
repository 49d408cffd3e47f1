use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::model::StanceLabel;
use crate::textproc::{guess_language, preprocess, split_words, Vocabulary};

/// Pluggable stance detector (e.g. an external fine-tuned model).
pub trait StancePlugin: Send + Sync {
    fn name(&self) -> &str;
    fn classify(&self, article_body: &str, claim: &str) -> StanceLabel;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StanceConfig {
    /// Below this IDF-weighted Jaccard overlap the article is unrelated.
    pub unrelated_threshold: f64,
    /// Polarity scores within `[-neutral_band, neutral_band]` map to discuss.
    pub neutral_band: f64,
}

impl Default for StanceConfig {
    fn default() -> Self {
        StanceConfig {
            unrelated_threshold: 0.05,
            neutral_band: 0.1,
        }
    }
}

const AGREE_WORDS: &[&str] = &[
    "confirm", "confirms", "confirmed", "confirmation", "true", "correct", "accurate", "verified", "verify",
    "prove", "proves", "proved", "proven", "support", "supports", "supported", "agree", "agrees", "agreed",
    "acknowledge", "acknowledged", "admit", "admits", "admitted", "indeed", "genuine", "authentic",
    "validated", "corroborated", "corroborates", "backed", "endorsed", "affirmed",
    "أكد", "اكد", "يؤكد", "صحيح", "تأكيد", "تاكيد",
];

const DISAGREE_WORDS: &[&str] = &[
    "deny", "denies", "denied", "denial", "false", "falsely", "fake", "hoax", "myth", "debunk", "debunked",
    "refute", "refutes", "refuted", "reject", "rejects", "rejected", "dispute", "disputes", "disputed",
    "untrue", "wrong", "misleading", "baseless", "unfounded", "fabricated", "rumor", "rumour", "incorrect",
    "dismiss", "dismissed", "contradict", "contradicts", "contradicted", "lie", "lies", "lied",
    "نفى", "ينفي", "نفي", "كاذب", "كاذبة", "شائعة", "شائعات", "مزيف", "مزيفة",
];

const NEGATORS: &[&str] = &["not", "no", "never", "nor", "without", "hardly", "لا", "لم", "لن", "ليس"];

/// Negators flip polarity words at most this many tokens after them.
const NEGATION_REACH: usize = 2;

/// Lexical stance baseline.
///
/// The claim is compared with every sentence of the article; the largest
/// IDF-weighted Jaccard overlap decides relatedness. For related articles, a
/// signed polarity score `(agree − disagree) / (agree + disagree)` is computed
/// over the claim-adjacent sentences (those sharing a content word with the
/// claim, plus the sentence after each), with negated polarity words flipped.
#[derive(Debug, Clone, Default)]
pub struct LexicalStanceBaseline {
    pub config: StanceConfig,
    /// IDF source; all terms weigh 1 when absent.
    pub idf: Option<Vocabulary>,
}

fn sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?', '؟', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

impl LexicalStanceBaseline {
    pub fn new(config: StanceConfig) -> Self {
        LexicalStanceBaseline { config, idf: None }
    }

    fn weight(&self, term: &str) -> f64 {
        self.idf.as_ref().map_or(1.0, |v| v.idf_of(term))
    }

    fn weighted_jaccard(&self, a: &HashSet<String>, b: &HashSet<String>) -> f64 {
        let inter: f64 = a.intersection(b).map(|t| self.weight(t)).sum();
        let union: f64 = a.union(b).map(|t| self.weight(t)).sum();
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    /// Largest sentence-level overlap with the claim, in [0, 1].
    pub fn relatedness(&self, article_body: &str, claim: &str) -> f64 {
        let language = guess_language(claim);
        let claim_terms: HashSet<String> = preprocess(claim, language).into_iter().collect();
        sentences(article_body)
            .iter()
            .map(|s| {
                let terms: HashSet<String> = preprocess(s, language).into_iter().collect();
                self.weighted_jaccard(&claim_terms, &terms)
            })
            .fold(0.0, f64::max)
    }

    /// Signed polarity of the claim-adjacent sentences, in [-1, 1].
    pub fn polarity(&self, article_body: &str, claim: &str) -> f64 {
        let language = guess_language(claim);
        let claim_terms: HashSet<String> = preprocess(claim, language).into_iter().collect();
        let sents = sentences(article_body);
        let mut adjacent = vec![false; sents.len()];
        for (i, s) in sents.iter().enumerate() {
            if preprocess(s, language).iter().any(|t| claim_terms.contains(t)) {
                adjacent[i] = true;
                if i + 1 < sents.len() {
                    adjacent[i + 1] = true;
                }
            }
        }
        let (mut pos, mut neg) = (0u32, 0u32);
        for (s, _) in sents.iter().zip(&adjacent).filter(|(_, a)| **a) {
            let words = split_words(s);
            for (i, w) in words.iter().enumerate() {
                let sign = if AGREE_WORDS.contains(&w.as_str()) {
                    1
                } else if DISAGREE_WORDS.contains(&w.as_str()) {
                    -1
                } else {
                    continue;
                };
                let negated = words[i.saturating_sub(NEGATION_REACH)..i]
                    .iter()
                    .any(|p| NEGATORS.contains(&p.as_str()));
                if (sign > 0) != negated {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
        }
        if pos + neg == 0 {
            0.0
        } else {
            (f64::from(pos) - f64::from(neg)) / f64::from(pos + neg)
        }
    }

    pub fn classify(&self, article_body: &str, claim: &str) -> StanceLabel {
        if self.relatedness(article_body, claim) < self.config.unrelated_threshold {
            return StanceLabel::Unrelated;
        }
        let score = self.polarity(article_body, claim);
        if score > self.config.neutral_band {
            StanceLabel::Agree
        } else if score < -self.config.neutral_band {
            StanceLabel::Disagree
        } else {
            StanceLabel::Discuss
        }
    }
}

impl StancePlugin for LexicalStanceBaseline {
    fn name(&self) -> &str {
        "lexical-baseline"
    }

    fn classify(&self, article_body: &str, claim: &str) -> StanceLabel {
        LexicalStanceBaseline::classify(self, article_body, claim)
    }
}

/// A registered plugin, falling back to the lexical baseline when allowed.
pub struct StanceClassifier {
    plugin: Option<Box<dyn StancePlugin>>,
    baseline: Option<LexicalStanceBaseline>,
}

impl StanceClassifier {
    pub fn baseline(config: StanceConfig) -> Self {
        StanceClassifier {
            plugin: None,
            baseline: Some(LexicalStanceBaseline::new(config)),
        }
    }

    pub fn with_plugin(plugin: Box<dyn StancePlugin>) -> Self {
        StanceClassifier {
            plugin: Some(plugin),
            baseline: None,
        }
    }

    pub fn disabled() -> Self {
        StanceClassifier {
            plugin: None,
            baseline: None,
        }
    }

    pub fn backend_name(&self) -> Option<&str> {
        match (&self.plugin, &self.baseline) {
            (Some(p), _) => Some(p.name()),
            (None, Some(b)) => Some(StancePlugin::name(b)),
            (None, None) => None,
        }
    }
}

impl Default for StanceClassifier {
    fn default() -> Self {
        Self::baseline(StanceConfig::default())
    }
}

pub fn classify_stance(
    article_body: &str,
    claim: &str,
    classifier: &StanceClassifier,
) -> Result<StanceLabel, ClassifierError> {
    if let Some(p) = &classifier.plugin {
        return Ok(p.classify(article_body, claim));
    }
    match &classifier.baseline {
        Some(b) => Ok(b.classify(article_body, claim)),
        None => Err(ClassifierError::NoStanceBackend),
    }
}
