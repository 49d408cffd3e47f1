use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::SimilarityGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainResult {
    /// Community of each node. Communities are numbered 0.. in order of
    /// their smallest member.
    pub partition: Vec<usize>,
    pub modularity: f64,
    /// Modularity of the singleton start, then after every sweep that moved a node.
    pub trace: Vec<f64>,
}

/// Symmetric weight matrix in adjacency form. `self_loops[i]` holds `A_ii`,
/// which after aggregation is the internal weight of a community counted
/// from both ends.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn from_graph(g: &SimilarityGraph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.len()).map(|i| g.neighbors(i).to_vec()).collect();
        let self_loops = vec![0.0; g.len()];
        Self::with(adj, self_loops)
    }

    fn with(adj: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degree = adj
            .iter()
            .zip(&self_loops)
            .map(|(row, s)| row.iter().map(|e| e.1).sum::<f64>() + s)
            .collect();
        Level { adj, self_loops, degree }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapses each community into one node.
    fn aggregate(&self, community: &[usize], n_communities: usize) -> Level {
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n_communities];
        let mut self_loops = vec![0.0; n_communities];
        for i in 0..self.len() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = community[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    *rows[ci].entry(cj).or_default() += w;
                }
            }
        }
        Level::with(rows.into_iter().map(|r| r.into_iter().collect()).collect(), self_loops)
    }
}

/// Weighted modularity `Q = (1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`;
/// 0 for a graph without edges.
pub fn modularity(graph: &SimilarityGraph, partition: &[usize]) -> f64 {
    level_modularity(&Level::from_graph(graph), partition)
}

fn level_modularity(level: &Level, community: &[usize]) -> f64 {
    let two_m: f64 = level.degree.iter().sum();
    if two_m <= 0.0 {
        return 0.0;
    }
    let n_comm = community.iter().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; n_comm];
    let mut total = vec![0.0; n_comm];
    for i in 0..level.len() {
        let c = community[i];
        total[c] += level.degree[i];
        internal[c] += level.self_loops[i];
        for &(j, w) in &level.adj[i] {
            if community[j] == c {
                internal[c] += w;
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(inside, tot)| inside / two_m - (tot / two_m).powi(2))
        .sum()
}

/// Relative slack below which a gain does not count as an improvement.
const GAIN_EPSILON: f64 = 1e-12;

/// Local-moving phase. Returns whether any node changed community.
fn move_nodes(level: &Level, community: &mut [usize], rng: &mut ChaCha8Rng, trace: &mut Vec<f64>) -> bool {
    let n = level.len();
    let two_m: f64 = level.degree.iter().sum();
    let mut total = vec![0.0; n];
    for i in 0..n {
        total[community[i]] += level.degree[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let k_i = level.degree[i];
            if k_i == 0.0 {
                continue;
            }
            let own = community[i];
            for &(j, w) in &level.adj[i] {
                let c = community[j];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            total[own] -= k_i;

            // gain of joining c, up to the common factor 1/m: k_i,in(c) − tot(c)·k_i / 2m
            let gain = |c: usize, links: &[f64], total: &[f64]| links[c] - total[c] * k_i / two_m;
            let own_gain = gain(own, &links, &total);
            let mut best = own;
            let mut best_gain = own_gain;
            let slack = GAIN_EPSILON * k_i;
            for &c in &touched {
                let g = gain(c, &links, &total);
                if g > best_gain + slack || ((g - best_gain).abs() <= slack && c < best && best != own) {
                    best = c;
                    best_gain = g;
                }
            }
            if best_gain <= own_gain + slack {
                best = own;
            }
            total[best] += k_i;
            if best != own {
                community[i] = best;
                moved = true;
            }
            for c in touched.drain(..) {
                links[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
        any_move = true;
        trace.push(level_modularity(level, &renumber(community)));
    }
    any_move
}

/// Renumbers community labels 0.. in order of first appearance.
fn renumber(community: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    community
        .iter()
        .map(|c| {
            let next = map.len();
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

/// Louvain community detection on weighted modularity.
///
/// Each pass visits nodes in a seed-shuffled order and moves a node to the
/// neighbouring community with the largest strictly positive modularity gain
/// (ties go to the lowest community id, and a node stays put when its own
/// community ties the best); passes repeat until a full sweep moves nothing.
/// The graph is then collapsed to one node per community and the process
/// repeats until no node moves. Nodes without edges end as singletons.
pub fn louvain(graph: &SimilarityGraph, seed: u64) -> LouvainResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(graph);
    let mut membership: Vec<usize> = (0..graph.len()).collect();
    let mut trace = vec![level_modularity(&level, &membership)];
    loop {
        let mut community: Vec<usize> = (0..level.len()).collect();
        if !move_nodes(&level, &mut community, &mut rng, &mut trace) {
            break;
        }
        let community = renumber(&community);
        let n_comm = community.iter().max().map_or(0, |c| c + 1);
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        level = level.aggregate(&community, n_comm);
    }
    let partition = renumber(&membership);
    let q = modularity(graph, &partition);
    LouvainResult {
        partition,
        modularity: q,
        trace,
    }
}

/// Runs [`louvain`] with seeds `seed, seed + 1, …` (`restarts` runs, at
/// least one) and keeps the partition of highest modularity; ties keep the
/// earlier run.
pub fn louvain_restarts(graph: &SimilarityGraph, seed: u64, restarts: u32) -> LouvainResult {
    let mut best = louvain(graph, seed);
    for k in 1..u64::from(restarts.max(1)) {
        let r = louvain(graph, seed.wrapping_add(k));
        if r.modularity > best.modularity {
            best = r;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cliques(bridge: f64) -> SimilarityGraph {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        edges.push((3, 4, bridge));
        SimilarityGraph::from_edges(8, &edges)
    }

    #[test]
    fn recovers_two_cliques() {
        for seed in 0..20 {
            let r = louvain(&two_cliques(0.31), seed);
            assert_eq!(r.partition, vec![0, 0, 0, 0, 1, 1, 1, 1]);
            assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }

    #[test]
    fn empty_and_single_node() {
        let r = louvain(&SimilarityGraph::from_edges(0, &[]), 0);
        assert!(r.partition.is_empty());
        assert_eq!(r.modularity, 0.0);
        let r = louvain(&SimilarityGraph::from_edges(1, &[]), 0);
        assert_eq!(r.partition, vec![0]);
    }

    #[test]
    fn isolated_nodes_stay_alone() {
        let g = SimilarityGraph::from_edges(4, &[(0, 1, 1.0)]);
        let r = louvain(&g, 3);
        assert_eq!(r.partition, vec![0, 0, 1, 2]);
    }

    #[test]
    fn modularity_by_hand() {
        // single edge, both ends together: Q = 1/2 - (2/2)^2... = 2/2 - 1 = 0
        let g = SimilarityGraph::from_edges(2, &[(0, 1, 1.0)]);
        assert!((modularity(&g, &[0, 0]) - 0.0).abs() < 1e-15);
        // apart: Q = -2·(1/2)^2 = -0.5
        assert!((modularity(&g, &[0, 1]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn scaling_weights_keeps_partition() {
        let g = two_cliques(0.31);
        let a = louvain(&g, 5);
        let b = louvain(&g.scaled(7.5), 5);
        assert_eq!(a.partition, b.partition);
    }
}
