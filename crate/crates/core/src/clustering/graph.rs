use std::collections::HashMap;

use rayon::prelude::*;

use crate::model::ArticleId;
use crate::textproc::{cosine, SparseVector};

/// Undirected weighted graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub nodes: Vec<ArticleId>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SimilarityGraph {
    /// Graph over `n` anonymous nodes (ids are their decimal indices).
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let nodes = (0..n).map(|i| ArticleId::from(i.to_string().as_str())).collect();
        Self::with_nodes(nodes, edges)
    }

    /// Parallel edges are summed; self-loops are ignored.
    pub fn with_nodes(nodes: Vec<ArticleId>, edges: &[(usize, usize, f64)]) -> Self {
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
        for &(i, j, w) in edges {
            if i == j {
                continue;
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for row in adjacency.iter_mut() {
            row.sort_by_key(|e| e.0);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        SimilarityGraph { nodes, adjacency }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    /// Each undirected edge once, as `(i, j, weight)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |e| e.0 > i).map(move |&(j, w)| (i, j, w)))
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().iter().map(|e| e.2).sum()
    }

    /// Same edges with every weight set to 1.
    pub fn unweighted(&self) -> Self {
        SimilarityGraph {
            nodes: self.nodes.clone(),
            adjacency: self
                .adjacency
                .iter()
                .map(|row| row.iter().map(|e| (e.0, 1.0)).collect())
                .collect(),
        }
    }

    /// Same edges with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        SimilarityGraph {
            nodes: self.nodes.clone(),
            adjacency: self
                .adjacency
                .iter()
                .map(|row| row.iter().map(|e| (e.0, e.1 * factor)).collect())
                .collect(),
        }
    }
}

/// All-pairs cosine over `nodes`; an edge joins `i` and `j` iff `sim ≥ t1`.
/// Articles missing from `vectors` become isolated nodes. Pair similarities
/// are computed in parallel but collected in node order.
pub fn build_graph(nodes: &[ArticleId], vectors: &HashMap<ArticleId, SparseVector>, t1: f64) -> SimilarityGraph {
    let empty = SparseVector::new();
    let vecs: Vec<&SparseVector> = nodes.iter().map(|id| vectors.get(id).unwrap_or(&empty)).collect();
    let edges: Vec<(usize, usize, f64)> = (0..nodes.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let vecs = &vecs;
            (i + 1..vecs.len()).filter_map(move |j| {
                let sim = cosine(vecs[i], vecs[j]);
                (sim >= t1).then_some((i, j, sim))
            })
        })
        .collect();
    SimilarityGraph::with_nodes(nodes.to_vec(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<ArticleId> {
        (0..n).map(|i| ArticleId::from(format!("a{i}").as_str())).collect()
    }

    #[test]
    fn identical_articles_get_unit_edge() {
        let nodes = ids(2);
        let v = SparseVector::from_dense(&[0.6, 0.8]);
        let vectors = nodes.iter().map(|id| (id.clone(), v.clone())).collect();
        let g = build_graph(&nodes, &vectors, 0.31);
        let e = g.edges();
        assert_eq!(e.len(), 1);
        assert!((e[0].2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_inclusive() {
        let nodes = ids(2);
        // cos = 0.31 exactly in binary: unit vectors (1, 0) and (0.31, sqrt(1 - 0.31²))
        let a = SparseVector::from_dense(&[1.0, 0.0]);
        let b = SparseVector::from_dense(&[0.31, (1.0f64 - 0.31 * 0.31).sqrt()]);
        assert_eq!(cosine(&a, &b), 0.31);
        let vectors = [(nodes[0].clone(), a), (nodes[1].clone(), b)].into_iter().collect();
        assert_eq!(build_graph(&nodes, &vectors, 0.31).edges().len(), 1);
    }

    #[test]
    fn disjoint_vocabularies_have_no_edge() {
        let nodes = ids(2);
        let vectors = [
            (nodes[0].clone(), SparseVector::from_dense(&[1.0, 0.0])),
            (nodes[1].clone(), SparseVector::from_dense(&[0.0, 1.0])),
        ]
        .into_iter()
        .collect();
        let g = build_graph(&nodes, &vectors, 0.31);
        assert!(g.edges().is_empty());
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn no_self_loops_and_symmetric() {
        let g = SimilarityGraph::from_edges(3, &[(0, 0, 1.0), (0, 1, 0.5), (2, 1, 0.7)]);
        assert!(g.neighbors(0).iter().all(|e| e.0 != 0));
        assert_eq!(g.neighbors(1), &[(0, 0.5), (2, 0.7)]);
        assert_eq!(g.edges().len(), 2);
    }
}
