use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::lexicon::split_words;

pub const CHAR_NGRAM_SIZES: [usize; 2] = [2, 3];
/// Words longer than this many characters count as long.
const LONG_WORD_CHARS: usize = 6;

/// Vocabulary-richness and readability measures plus character n-gram counts.
///
/// * `type_token_ratio`: distinct words / words
/// * `hapax_ratio`: words occurring exactly once / words
/// * `avg_sentence_length`: words / sentences (sentences end at `.`, `!`, `?`, `؟`)
/// * `avg_word_length`: characters per word
/// * `flesch_reading_ease`: 206.835 − 1.015·(words/sentences) − 84.6·(syllables/words),
///   syllables counted as vowel groups with a silent-final-e correction
/// * `long_word_ratio`: words of more than six characters / words
///
/// Empty text yields zeros everywhere.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StyleFeatures {
    pub char_ngram_counts: BTreeMap<String, u32>,
    pub type_token_ratio: f64,
    pub hapax_ratio: f64,
    pub avg_sentence_length: f64,
    pub avg_word_length: f64,
    pub flesch_reading_ease: f64,
    pub long_word_ratio: f64,
}

impl StyleFeatures {
    pub const SCALAR_NAMES: [&'static str; 6] = [
        "type_token_ratio",
        "hapax_ratio",
        "avg_sentence_length",
        "avg_word_length",
        "flesch_reading_ease",
        "long_word_ratio",
    ];

    /// The scalar measures in [`Self::SCALAR_NAMES`] order.
    pub fn scalars(&self) -> [f64; 6] {
        [
            self.type_token_ratio,
            self.hapax_ratio,
            self.avg_sentence_length,
            self.avg_word_length,
            self.flesch_reading_ease,
            self.long_word_ratio,
        ]
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group count, at least one per word.
fn syllables(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    let mut groups = 0;
    let mut prev = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    if groups > 1 && word.ends_with('e') && !word.ends_with("le") {
        groups -= 1;
    }
    groups.max(1)
}

fn sentence_count(text: &str) -> usize {
    text.split(['.', '!', '?', '؟'])
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .count()
        .max(1)
}

fn char_ngrams(text: &str) -> BTreeMap<String, u32> {
    let folded: String = text
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .chars()
        .flat_map(char::to_lowercase)
        .collect();
    let chars: Vec<char> = folded.chars().collect();
    let mut counts = BTreeMap::new();
    for n in CHAR_NGRAM_SIZES {
        for window in chars.windows(n) {
            *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    counts
}

pub fn style_features(text: &str) -> StyleFeatures {
    let words: Vec<String> = split_words(text)
        .into_iter()
        .filter(|w| w.chars().any(char::is_alphabetic))
        .collect();
    if words.is_empty() {
        return StyleFeatures {
            char_ngram_counts: char_ngrams(text),
            ..StyleFeatures::default()
        };
    }

    let n = words.len() as f64;
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for w in &words {
        *freq.entry(w).or_default() += 1;
    }
    let hapax = freq.values().filter(|c| **c == 1).count() as f64;
    let chars: usize = words.iter().map(|w| w.chars().count()).sum();
    let long = words.iter().filter(|w| w.chars().count() > LONG_WORD_CHARS).count() as f64;
    let syl: usize = words.iter().map(|w| syllables(w)).sum();
    let sentences = sentence_count(text) as f64;

    StyleFeatures {
        char_ngram_counts: char_ngrams(text),
        type_token_ratio: freq.len() as f64 / n,
        hapax_ratio: hapax / n,
        avg_sentence_length: n / sentences,
        avg_word_length: chars as f64 / n,
        flesch_reading_ease: 206.835 - 1.015 * (n / sentences) - 84.6 * (syl as f64 / n),
        long_word_ratio: long / n,
    }
}
