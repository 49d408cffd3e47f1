use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::ClusteringError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Scores { precision, recall, f1 }
    }
}

/// Cluster sizes and the predicted × gold contingency table.
struct Contingency {
    n: usize,
    predicted_sizes: Vec<usize>,
    gold_sizes: Vec<usize>,
    /// `(predicted cluster, gold cluster, count)` for non-empty cells.
    cells: Vec<(usize, usize, usize)>,
}

fn contingency<I, P, G>(predicted: &HashMap<I, P>, gold: &HashMap<I, G>) -> Result<Contingency, ClusteringError>
where
    I: Eq + Hash,
    P: Eq + Hash,
    G: Eq + Hash,
{
    if predicted.len() != gold.len() || predicted.keys().any(|k| !gold.contains_key(k)) {
        return Err(ClusteringError::PartitionMismatch);
    }
    let mut p_ids: HashMap<&P, usize> = HashMap::new();
    let mut g_ids: HashMap<&G, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    let mut predicted_sizes = Vec::new();
    let mut gold_sizes = Vec::new();
    for (item, p) in predicted {
        let g = &gold[item];
        let next = p_ids.len();
        let pi = *p_ids.entry(p).or_insert(next);
        let next = g_ids.len();
        let gi = *g_ids.entry(g).or_insert(next);
        if pi == predicted_sizes.len() {
            predicted_sizes.push(0);
        }
        if gi == gold_sizes.len() {
            gold_sizes.push(0);
        }
        predicted_sizes[pi] += 1;
        gold_sizes[gi] += 1;
        *cells.entry((pi, gi)).or_default() += 1;
    }
    let mut cells: Vec<(usize, usize, usize)> = cells.into_iter().map(|((p, g), c)| (p, g, c)).collect();
    // fixed summation order keeps results bit-identical across runs
    cells.sort_unstable();
    Ok(Contingency {
        n: predicted.len(),
        predicted_sizes,
        gold_sizes,
        cells,
    })
}

/// BCubed precision, recall and F1 averaged over items.
///
/// An item in a cell of `c` items whose predicted cluster has `|P|` items
/// contributes precision `c / |P|`, so a cell adds `c² / |P|` to the sum.
/// Empty partitions score 1.
pub fn bcubed_f1<I, P, G>(predicted: &HashMap<I, P>, gold: &HashMap<I, G>) -> Result<Scores, ClusteringError>
where
    I: Eq + Hash,
    P: Eq + Hash,
    G: Eq + Hash,
{
    let t = contingency(predicted, gold)?;
    if t.n == 0 {
        return Ok(Scores::from_pr(1.0, 1.0));
    }
    let mut p = 0.0;
    let mut r = 0.0;
    for &(pi, gi, c) in &t.cells {
        let c2 = (c * c) as f64;
        p += c2 / t.predicted_sizes[pi] as f64;
        r += c2 / t.gold_sizes[gi] as f64;
    }
    let n = t.n as f64;
    Ok(Scores::from_pr(p / n, r / n))
}

fn pairs(k: usize) -> u64 {
    (k as u64) * (k as u64).saturating_sub(1) / 2
}

/// Precision and recall of "same cluster" over all unordered item pairs.
/// A side with no positive pairs has ratio 0/0, taken as 1.
pub fn pairwise_f1<I, P, G>(predicted: &HashMap<I, P>, gold: &HashMap<I, G>) -> Result<Scores, ClusteringError>
where
    I: Eq + Hash,
    P: Eq + Hash,
    G: Eq + Hash,
{
    let t = contingency(predicted, gold)?;
    let tp: u64 = t.cells.iter().map(|c| pairs(c.2)).sum();
    let pred_pairs: u64 = t.predicted_sizes.iter().map(|s| pairs(*s)).sum();
    let gold_pairs: u64 = t.gold_sizes.iter().map(|s| pairs(*s)).sum();
    let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(Scores::from_pr(ratio(tp, pred_pairs), ratio(tp, gold_pairs)))
}
