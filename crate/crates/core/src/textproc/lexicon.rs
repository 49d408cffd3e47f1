//! Tokenization, stopwording and lemmatization for English and Arabic.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use crate::model::Language;

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");
const STOPWORDS_AR: &str = include_str!("../../data/stopwords_ar.txt");
const LEMMAS_EN: &str = include_str!("../../data/lemmas_en.txt");

/// Stopword lists and the English lemma table.
#[derive(Debug, Clone)]
pub struct Lexicon {
    stopwords_en: HashSet<String>,
    stopwords_ar: HashSet<String>,
    lemmas_en: HashMap<String, String>,
}

fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

impl Lexicon {
    /// Builds a lexicon from the text of the three table files.
    pub fn from_tables(stopwords_en: &str, stopwords_ar: &str, lemmas_en: &str) -> Self {
        Lexicon {
            stopwords_en: entries(stopwords_en).map(|w| w.replace(['\'', '’'], "")).collect(),
            stopwords_ar: entries(stopwords_ar).map(normalize_arabic).collect(),
            lemmas_en: entries(lemmas_en)
                .filter_map(|l| l.split_once('\t'))
                .map(|(form, lemma)| (form.trim().to_owned(), lemma.trim().to_owned()))
                .collect(),
        }
    }

    /// Reads `stopwords_en.txt`, `stopwords_ar.txt` and `lemmas_en.txt` from `dir`.
    pub fn load(dir: &Path) -> std::io::Result<Self> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        Ok(Self::from_tables(
            &read("stopwords_en.txt")?,
            &read("stopwords_ar.txt")?,
            &read("lemmas_en.txt")?,
        ))
    }

    /// The tables compiled into the crate.
    pub fn shipped() -> &'static Lexicon {
        static SHIPPED: OnceLock<Lexicon> = OnceLock::new();
        SHIPPED.get_or_init(|| Lexicon::from_tables(STOPWORDS_EN, STOPWORDS_AR, LEMMAS_EN))
    }

    pub fn lemma_count(&self) -> usize {
        self.lemmas_en.len()
    }

    pub fn is_stopword(&self, token: &str, language: Language) -> bool {
        match language {
            Language::En => self.stopwords_en.contains(token),
            Language::Ar => self.stopwords_ar.contains(token),
        }
    }

    pub fn lemmatize_en(&self, token: &str) -> String {
        if let Some(lemma) = self.lemmas_en.get(token) {
            return lemma.clone();
        }
        strip_plural(token)
    }

    /// Casefold, strip punctuation, drop stopwords, lemmatize (English) or
    /// light-stem (Arabic).
    pub fn preprocess(&self, text: &str, language: Language) -> Vec<String> {
        let mut out = Vec::new();
        for raw in split_words(text) {
            match language {
                Language::En => {
                    if self.stopwords_en.contains(&raw) {
                        continue;
                    }
                    out.push(self.lemmatize_en(&raw));
                }
                Language::Ar => {
                    let normalized = normalize_arabic(&raw);
                    if normalized.is_empty() || self.stopwords_ar.contains(&normalized) {
                        continue;
                    }
                    out.push(light_stem_arabic(&normalized));
                }
            }
        }
        out
    }
}

/// [`Lexicon::preprocess`] with the shipped tables.
pub fn preprocess(text: &str, language: Language) -> Vec<String> {
    Lexicon::shipped().preprocess(text, language)
}

/// Arabic when Arabic-script letters outnumber the other letters, else English.
pub fn guess_language(text: &str) -> Language {
    let (mut arabic, mut other) = (0usize, 0usize);
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        if ('\u{0600}'..='\u{06FF}').contains(&c) {
            arabic += 1;
        } else {
            other += 1;
        }
    }
    if arabic > other {
        Language::Ar
    } else {
        Language::En
    }
}

fn is_arabic_mark(c: char) -> bool {
    // harakat, superscript alef and tatweel
    matches!(c, '\u{064B}'..='\u{065F}' | '\u{0670}' | '\u{0640}')
}

/// Lowercased word tokens; apostrophes inside words and Arabic diacritics are
/// removed, every other non-alphanumeric character separates tokens.
pub fn split_words(text: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c == '\'' || c == '’' || is_arabic_mark(c) {
            continue;
        } else if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

fn strip_plural(token: &str) -> String {
    let n = token.chars().count();
    if n > 4 && token.ends_with("ies") {
        return format!("{}y", &token[..token.len() - 3]);
    }
    if token.ends_with("sses") {
        return token[..token.len() - 2].to_owned();
    }
    for suffix in ["ches", "shes", "xes", "zes"] {
        if n > suffix.len() + 1 && token.ends_with(suffix) {
            return token[..token.len() - 2].to_owned();
        }
    }
    if n > 3 && token.ends_with('s') && !["ss", "us", "is"].iter().any(|s| token.ends_with(s)) {
        return token[..token.len() - 1].to_owned();
    }
    token.to_owned()
}

/// Unifies alef variants and alef maqsura.
pub fn normalize_arabic(word: &str) -> String {
    word.chars()
        .filter(|c| !is_arabic_mark(*c))
        .map(|c| match c {
            'أ' | 'إ' | 'آ' => 'ا',
            'ى' => 'ي',
            other => other,
        })
        .collect()
}

const AR_PREFIXES: &[&str] = &["وال", "بال", "كال", "فال", "لل", "ال"];
const AR_SUFFIXES: &[&str] = &["ها", "ان", "ات", "ون", "ين", "يه", "ية", "ه", "ة", "ي"];

/// Light stemming: leading conjunction waw, definite-article prefixes, then
/// common suffixes, each stripped only while at least two letters remain.
pub fn light_stem_arabic(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    if w.len() > 3 && w[0] == 'و' {
        w.remove(0);
    }
    for prefix in AR_PREFIXES {
        let p: Vec<char> = prefix.chars().collect();
        if w.len() >= p.len() + 2 && w.starts_with(&p) {
            w.drain(..p.len());
            break;
        }
    }
    for suffix in AR_SUFFIXES {
        let s: Vec<char> = suffix.chars().collect();
        if w.len() >= s.len() + 2 && w.ends_with(&s) {
            w.truncate(w.len() - s.len());
        }
    }
    w.into_iter().collect()
}
