use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::sparse::SparseVector;
use super::TextError;

/// Term index plus document frequencies of a fitted corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    document_frequency: Vec<u32>,
    n_docs: u32,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    document_frequency: Vec<u32>,
    n_docs: u32,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r.terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary {
            terms: r.terms,
            document_frequency: r.document_frequency,
            n_docs: r.n_docs,
            index,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            document_frequency: v.document_frequency,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: u32) -> Option<&str> {
        self.terms.get(index as usize).map(String::as_str)
    }

    pub fn document_frequency(&self, index: u32) -> u32 {
        self.document_frequency[index as usize]
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df))`.
    pub fn idf(&self, index: u32) -> f64 {
        let df = f64::from(self.document_frequency(index));
        ((1.0 + f64::from(self.n_docs)) / (1.0 + df)).ln()
    }

    /// IDF of a term, treating unseen terms as having df = 0.
    pub fn idf_of(&self, term: &str) -> f64 {
        match self.index_of(term) {
            Some(i) => self.idf(i),
            None => (1.0 + f64::from(self.n_docs)).ln(),
        }
    }

    /// L2-normalized tf-idf vector; out-of-vocabulary terms are dropped.
    pub fn tfidf(&self, doc: &[String]) -> SparseVector {
        let mut tf: HashMap<u32, u32> = HashMap::new();
        for token in doc {
            if let Some(i) = self.index_of(token) {
                *tf.entry(i).or_default() += 1;
            }
        }
        let pairs = tf
            .into_iter()
            .map(|(i, count)| (i, f64::from(count) * self.idf(i)))
            .collect();
        SparseVector::from_pairs(pairs).normalized()
    }
}

/// Indexes every term that occurs in at least `min_df` documents. Terms are
/// numbered in lexicographic order so the result is independent of input order.
pub fn fit_vocabulary(docs: &[Vec<String>], min_df: usize) -> Result<Vocabulary, TextError> {
    if docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for term in unique {
            *df.entry(term).or_default() += 1;
        }
    }
    let (terms, document_frequency): (Vec<String>, Vec<u32>) = df
        .into_iter()
        .filter(|(_, n)| *n as usize >= min_df.max(1))
        .map(|(t, n)| (t.to_owned(), n))
        .unzip();
    Ok(VocabularyRepr {
        terms,
        document_frequency,
        n_docs: docs.len() as u32,
    }
    .into())
}

pub fn tfidf(doc: &[String], vocab: &Vocabulary) -> SparseVector {
    vocab.tfidf(doc)
}
