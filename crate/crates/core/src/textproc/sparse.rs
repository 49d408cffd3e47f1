use serde::{Deserialize, Serialize};

/// Sparse real vector: indices strictly increasing, no explicit zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from arbitrary `(index, weight)` pairs; duplicates are summed and zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|e| e.1 != 0.0);
        SparseVector { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as u32, *v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// One past the largest stored index.
    pub fn dim_hint(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0 as usize + 1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn scale(&self, factor: f64) -> SparseVector {
        SparseVector::from_pairs(self.entries.iter().map(|&(i, w)| (i, w * factor)).collect())
    }

    /// Unit-length copy; the empty vector stays empty.
    pub fn normalized(&self) -> SparseVector {
        let n = self.norm();
        if n == 0.0 {
            return SparseVector::new();
        }
        self.scale(1.0 / n)
    }

    /// Shifts every index by `offset`, for concatenating feature blocks.
    pub fn offset(&self, offset: u32) -> SparseVector {
        SparseVector {
            entries: self.entries.iter().map(|&(i, w)| (i + offset, w)).collect(),
        }
    }

    pub fn concat(&self, other: &SparseVector, other_offset: u32) -> SparseVector {
        debug_assert!(self.dim_hint() <= other_offset as usize);
        let mut entries = self.entries.clone();
        entries.extend(other.offset(other_offset).entries);
        SparseVector { entries }
    }
}

/// Cosine similarity of two L2-normalized vectors, i.e. their dot product;
/// 0 when either is empty.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    a.dot(b)
}

/// Mean of the vectors, renormalized to unit length.
pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a SparseVector>) -> SparseVector {
    let mut pairs = Vec::new();
    let mut n = 0usize;
    for v in vectors {
        pairs.extend_from_slice(v.entries());
        n += 1;
    }
    if n == 0 {
        return SparseVector::new();
    }
    SparseVector::from_pairs(pairs).scale(1.0 / n as f64).normalized()
}
