//! Seeded synthetic corpora for evaluation and demos.
//!
//! Words are pronounceable nonsense built from syllables so they pass through
//! the English preprocessor unchanged and never collide with stopwords.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use url::Url;

use crate::model::{Article, Language, MediumId, SectionLabel};

const SYLLABLES: [&str; 12] = ["ba", "ko", "mi", "du", "ze", "ra", "lu", "fi", "no", "ga", "pe", "tu"];

/// Distinct pseudo-word for every `n`.
pub fn pseudo_word(n: usize) -> String {
    let mut word = String::new();
    let mut k = n;
    loop {
        word.push_str(SYLLABLES[k % SYLLABLES.len()]);
        k /= SYLLABLES.len();
        if k == 0 {
            break;
        }
    }
    // a closing consonant keeps the plural stripper away
    word.push('n');
    word
}

fn vocabulary(group: usize, size: usize) -> Vec<String> {
    (0..size).map(|j| pseudo_word(10_000 * (group + 1) + j)).collect()
}

/// `per_section` documents for each of the six sections. Each document draws
/// most tokens from its section's private vocabulary core and the rest from a
/// shared pool.
pub fn section_corpus(per_section: usize, seed: u64) -> Vec<(String, SectionLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = vocabulary(99, 300);
    let cores: Vec<Vec<String>> = (0..SectionLabel::ALL.len()).map(|s| vocabulary(s, 60)).collect();
    let mut docs = Vec::with_capacity(per_section * cores.len());
    for _ in 0..per_section {
        for (s, label) in SectionLabel::ALL.iter().enumerate() {
            let mut words: Vec<&str> = Vec::new();
            for _ in 0..rng.gen_range(6..12) {
                words.push(cores[s].choose(&mut rng).unwrap());
            }
            for _ in 0..rng.gen_range(10..20) {
                words.push(shared.choose(&mut rng).unwrap());
            }
            words.shuffle(&mut rng);
            docs.push((words.join(" "), *label));
        }
    }
    docs
}

pub const STORY_CORPUS_START: (i32, u32, u32) = (2024, 3, 1);

/// `topics × per_topic` articles with disjoint topic vocabularies plus 10%
/// shared noise tokens, published uniformly at random over `days` days.
/// Returns each article with its gold topic index, sorted by publication time.
pub fn story_corpus(topics: usize, per_topic: usize, days: i64, seed: u64) -> Vec<(Article, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = vocabulary(98, 100);
    let vocabs: Vec<Vec<String>> = (0..topics).map(|t| vocabulary(t, 40)).collect();
    let (y, m, d) = STORY_CORPUS_START;
    let start: DateTime<Utc> = Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap();
    let span = days * 24 * 3600;
    let mut out = Vec::with_capacity(topics * per_topic);
    for (t, vocab) in vocabs.iter().enumerate() {
        for i in 0..per_topic {
            let mut words: Vec<&str> = Vec::with_capacity(30);
            for _ in 0..27 {
                words.push(vocab.choose(&mut rng).unwrap());
            }
            for _ in 0..3 {
                words.push(noise.choose(&mut rng).unwrap());
            }
            words.shuffle(&mut rng);
            let title = words[..5].join(" ");
            let body = format!("{}.", words[5..].join(" "));
            let url = Url::parse(&format!("https://synthetic.example/topic{t}/{i}")).unwrap();
            let published = start + Duration::seconds(rng.gen_range(0..span));
            let article = Article::new(
                url,
                MediumId(format!("medium{}", i % 5)),
                title,
                body,
                Language::En,
                published,
            );
            out.push((article, t));
        }
    }
    out.sort_by(|a, b| (a.0.published_at, &a.0.id).cmp(&(b.0.published_at, &b.0.id)));
    out
}

const LOADED: [&str; 12] = [
    "traitors", "disgrace", "shocking", "enemy", "destroy", "corrupt", "never", "always", "everyone", "must", "betrayal",
    "outrage",
];
const REPORTING: [&str; 10] = [
    "said", "according", "reported", "officials", "percent", "statement", "published", "estimated", "spokesperson",
    "figures",
];

/// Labelled texts for the propaganda model: propagandistic ones are short,
/// exclamatory, shouty and use loaded words; the others read like wire copy.
pub fn propaganda_corpus(per_class: usize, seed: u64) -> Vec<(String, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filler = vocabulary(97, 200);
    let mut out = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        let mut sentences = Vec::new();
        for _ in 0..rng.gen_range(3..6) {
            let mut words: Vec<String> = Vec::new();
            for _ in 0..rng.gen_range(4..8) {
                words.push(filler.choose(&mut rng).unwrap().clone());
            }
            for _ in 0..2 {
                words.push(LOADED.choose(&mut rng).unwrap().to_string());
            }
            words.shuffle(&mut rng);
            words[0] = words[0].to_uppercase();
            sentences.push(format!("{} you!", words.join(" ")));
        }
        out.push((sentences.join(" "), true));

        let mut sentences = Vec::new();
        for _ in 0..rng.gen_range(2..4) {
            let mut words: Vec<String> = Vec::new();
            for _ in 0..rng.gen_range(14..22) {
                words.push(filler.choose(&mut rng).unwrap().clone());
            }
            for _ in 0..2 {
                words.push(REPORTING.choose(&mut rng).unwrap().to_string());
            }
            words.shuffle(&mut rng);
            words.push(rng.gen_range(2..99).to_string());
            sentences.push(format!("{}.", words.join(" ")));
        }
        out.push((sentences.join(" "), false));
    }
    out
}
