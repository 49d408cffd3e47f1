use std::collections::HashMap;

use crate::hash::fnv1a64;
use crate::textproc::SparseVector;

/// Growing document-frequency table over hashed term indices.
///
/// Unlike a fitted vocabulary it accepts new documents at any time, which the
/// streaming job needs; vectors reflect the statistics at the moment they are built.
#[derive(Debug, Clone, Default)]
pub struct TermSpace {
    df: HashMap<u32, u32>,
    n_docs: u32,
    min_df: u32,
}

pub fn term_index(term: &str) -> u32 {
    let h = fnv1a64(term.as_bytes());
    (h ^ (h >> 32)) as u32
}

impl TermSpace {
    pub fn new(min_df: u32) -> Self {
        TermSpace {
            min_df,
            ..Default::default()
        }
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn add_document(&mut self, tokens: &[String]) {
        let mut seen: Vec<u32> = tokens.iter().map(|t| term_index(t)).collect();
        seen.sort_unstable();
        seen.dedup();
        for i in seen {
            *self.df.entry(i).or_default() += 1;
        }
        self.n_docs += 1;
    }

    /// L2-normalized tf-idf with idf `ln((1 + N) / (1 + df))`; terms below `min_df` are dropped.
    pub fn vector(&self, tokens: &[String]) -> SparseVector {
        let mut tf: HashMap<u32, u32> = HashMap::new();
        for t in tokens {
            *tf.entry(term_index(t)).or_default() += 1;
        }
        let n = f64::from(self.n_docs);
        let pairs = tf
            .into_iter()
            .filter_map(|(i, c)| {
                let df = self.df.get(&i).copied().unwrap_or(0);
                (df >= self.min_df).then(|| (i, f64::from(c) * ((1.0 + n) / (1.0 + f64::from(df))).ln()))
            })
            .collect();
        SparseVector::from_pairs(pairs).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn min_df_filters_rare_terms() {
        let mut ts = TermSpace::new(2);
        for d in ["apple pear", "apple plum", "kiwi"] {
            ts.add_document(&toks(d));
        }
        let v = ts.vector(&toks("apple kiwi"));
        assert_eq!(v.nnz(), 1);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(ts.vector(&toks("kiwi")).is_empty());
    }
}
