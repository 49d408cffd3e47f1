//! Tokenization, TF-IDF vectors, cosine similarity and stylometric features.

mod lexicon;
mod sparse;
mod style;
mod vocab;

pub use lexicon::{guess_language, light_stem_arabic, normalize_arabic, preprocess, split_words, Lexicon};
pub use sparse::{centroid, cosine, SparseVector};
pub use style::{style_features, StyleFeatures, CHAR_NGRAM_SIZES};
pub use vocab::{fit_vocabulary, tfidf, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
}
