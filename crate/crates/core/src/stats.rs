//! Triangles, 2-paths, degrees and clustering coefficients.
//!
//! [`compute_stats`] is the fast path: neighbor sets are stored as bitsets in
//! a locality-preserving node order, so each neighbor-pair membership test
//! becomes a handful of word-wise ANDs over the overlap of two short windows.
//! [`brute_force_stats`] evaluates the defining triple sums literally and is
//! kept as an independent oracle.

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::model::{AdjacencyList, SampledGraph};

/// Default node cap for the cubic oracle.
pub const ORACLE_CAP: usize = 512;

/// Exact statistics of one graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringStats {
    /// Unordered triangle count `T`.
    pub triangle_count: u64,
    /// Ordered 2-path count, `sum_i d_i (d_i - 1)`.
    pub twopath_sum: u64,
    pub degrees: Vec<usize>,
    /// Triangles through each node.
    pub node_triangles: Vec<u64>,
    /// `6T / twopath_sum`; `None` when the graph has no 2-path.
    pub global_cc: Option<f64>,
    /// Zero for nodes of degree 0 or 1.
    pub local_cc: Vec<f64>,
    /// Mean of `local_cc` over all nodes, degree-deficient ones included.
    pub average_cc: f64,
}

impl ClusteringStats {
    fn from_counts(degrees: Vec<usize>, node_triangles: Vec<u64>) -> Self {
        let n = degrees.len();
        let twopath_sum: u64 = degrees.iter().map(|&d| pair_count(d)).sum();
        let triangle_count = node_triangles.iter().sum::<u64>() / 3;
        let local_cc: Vec<f64> = degrees
            .iter()
            .zip(&node_triangles)
            .map(|(&d, &t)| local_coefficient(2 * t, d))
            .collect();
        let average_cc = if n == 0 {
            0.0
        } else {
            crate::exec::compensated_sum(local_cc.iter().copied()) / n as f64
        };
        ClusteringStats {
            triangle_count,
            twopath_sum,
            global_cc: global_coefficient(6 * triangle_count, twopath_sum),
            degrees,
            node_triangles,
            local_cc,
            average_cc,
        }
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// Ordered triangle sum `sum_{i != j != k} A_ij A_jk A_ki = 6T`.
    pub fn ordered_triangle_sum(&self) -> u64 {
        6 * self.triangle_count
    }

    /// Ordered per-node triangle sum `sum_{j != k} A_ij A_jk A_ki` for node `i`.
    pub fn node_triangle_sum(&self, i: usize) -> u64 {
        2 * self.node_triangles[i]
    }
}

#[inline]
fn pair_count(d: usize) -> u64 {
    let d = d as u64;
    d * d.saturating_sub(1)
}

#[inline]
fn local_coefficient(ordered_triangles: u64, degree: usize) -> f64 {
    if degree < 2 {
        0.0
    } else {
        ordered_triangles as f64 / pair_count(degree) as f64
    }
}

#[inline]
fn global_coefficient(ordered_triangles: u64, ordered_twopaths: u64) -> Option<f64> {
    (ordered_twopaths > 0).then(|| ordered_triangles as f64 / ordered_twopaths as f64)
}

/// Neighbor sets as bitsets over node ranks, each restricted to the shortest
/// cyclic run of 64-bit words that covers it.
struct WindowedBitsets {
    total_words: usize,
    start: Vec<usize>,
    len: Vec<usize>,
    offset: Vec<usize>,
    words: Vec<u64>,
}

impl WindowedBitsets {
    fn build(adj: &AdjacencyList, rank: &[usize]) -> Self {
        let n = adj.len();
        let total_words = n.div_ceil(64).max(1);
        let mut start = vec![0; n];
        let mut len = vec![0; n];
        let mut offset = vec![0; n];
        let mut words = Vec::new();
        let mut word_ids: Vec<usize> = Vec::new();
        for u in 0..n {
            word_ids.clear();
            word_ids.extend(adj.neighbors(u).iter().map(|&v| rank[v] / 64));
            word_ids.sort_unstable();
            word_ids.dedup();
            offset[u] = words.len();
            let Some((s, l)) = covering_arc(&word_ids, total_words) else {
                continue;
            };
            start[u] = s;
            len[u] = l;
            words.resize(words.len() + l, 0);
            let row = &mut words[offset[u]..];
            for &v in adj.neighbors(u) {
                let r = rank[v];
                let k = (r / 64 + total_words - s) % total_words;
                row[k] |= 1u64 << (r % 64);
            }
        }
        WindowedBitsets {
            total_words,
            start,
            len,
            offset,
            words,
        }
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.words[self.offset[u]..self.offset[u] + self.len[u]]
    }

    /// `|N(u) ∩ N(v)|`.
    fn common(&self, u: usize, v: usize) -> u64 {
        let (u, v) = if self.len[u] <= self.len[v] { (u, v) } else { (v, u) };
        let (a, b) = (self.row(u), self.row(v));
        let w = self.total_words;
        let shift = (self.start[u] + w - self.start[v]) % w;
        let mut acc = 0u64;
        for (k, &word) in a.iter().enumerate() {
            let j = if shift + k >= w { shift + k - w } else { shift + k };
            if let Some(&other) = b.get(j) {
                acc += u64::from((word & other).count_ones());
            }
        }
        acc
    }
}

/// Shortest cyclic run `(start, len)` of word indices in `0..total` covering
/// every index in `sorted` (sorted, deduplicated).
fn covering_arc(sorted: &[usize], total: usize) -> Option<(usize, usize)> {
    let m = sorted.len();
    if m == 0 {
        return None;
    }
    let mut best_gap = sorted[0] + total - sorted[m - 1];
    let mut best_end = m - 1;
    for k in 0..m - 1 {
        let gap = sorted[k + 1] - sorted[k];
        if gap > best_gap {
            best_gap = gap;
            best_end = k;
        }
    }
    let start = sorted[(best_end + 1) % m];
    let end = sorted[best_end];
    Some((start, (end + total - start) % total + 1))
}

/// Exact statistics with the default execution strategy.
pub fn compute_stats(adj: &AdjacencyList) -> ClusteringStats {
    compute_stats_with(adj, Exec::default())
}

/// Exact statistics. Per-node work is independent and integer-valued, so the
/// result is identical for every [`Exec`].
pub fn compute_stats_with(adj: &AdjacencyList, exec: Exec) -> ClusteringStats {
    let n = adj.len();
    let mut rank = vec![0usize; n];
    match adj.locality_order() {
        Some(order) => {
            for (r, &id) in order.iter().enumerate() {
                rank[id] = r;
            }
        }
        None => rank.iter_mut().enumerate().for_each(|(i, r)| *r = i),
    }
    let bits = WindowedBitsets::build(adj, &rank);
    let node_triangles = exec.map(n, |u| {
        let twice: u64 = adj.neighbors(u).iter().map(|&v| bits.common(u, v)).sum();
        twice / 2
    });
    ClusteringStats::from_counts(adj.degrees(), node_triangles)
}

/// Ordered sums `(sum A_ij A_jk A_ki, sum A_ij A_ik)` over distinct triples,
/// i.e. `(6T, sum_i d_i (d_i - 1))`.
pub fn empirical_sums(adj: &AdjacencyList) -> (u64, u64) {
    let stats = compute_stats(adj);
    (stats.ordered_triangle_sum(), stats.twopath_sum)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("brute-force oracle is limited to {cap} nodes, graph has {n}")]
    TooLarge { n: usize, cap: usize },
}

/// Cubic reference implementation with the default node cap.
pub fn brute_force_stats(graph: &SampledGraph) -> Result<ClusteringStats, OracleError> {
    brute_force_stats_capped(graph, ORACLE_CAP)
}

/// Evaluates the defining sums over all ordered triples, testing every pair
/// with the model's edge rule directly (no adjacency list involved).
pub fn brute_force_stats_capped(graph: &SampledGraph, cap: usize) -> Result<ClusteringStats, OracleError> {
    let n = graph.len();
    if n > cap {
        return Err(OracleError::TooLarge { n, cap });
    }
    let a: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| graph.adjacent(i, j)).collect()).collect();
    let mut degrees = vec![0usize; n];
    let mut ordered_at = vec![0u64; n];
    let mut ordered_total = 0u64;
    let mut twopaths = 0u64;
    for i in 0..n {
        degrees[i] = (0..n).filter(|&j| a[i][j]).count();
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if a[i][j] && a[i][k] {
                    twopaths += 1;
                    if a[j][k] {
                        ordered_at[i] += 1;
                        ordered_total += 1;
                    }
                }
            }
        }
    }
    let node_triangles: Vec<u64> = ordered_at.iter().map(|&t| t / 2).collect();
    let local_cc: Vec<f64> = degrees
        .iter()
        .zip(&ordered_at)
        .map(|(&d, &t)| local_coefficient(t, d))
        .collect();
    let average_cc = if n == 0 {
        0.0
    } else {
        crate::exec::compensated_sum(local_cc.iter().copied()) / n as f64
    };
    Ok(ClusteringStats {
        triangle_count: ordered_total / 6,
        twopath_sum: twopaths,
        global_cc: global_coefficient(ordered_total, twopaths),
        degrees,
        node_triangles,
        local_cc,
        average_cc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GbmParams;

    fn complete(n: usize) -> AdjacencyList {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        AdjacencyList::from_edges(n, &edges)
    }

    #[test]
    fn complete_graph_on_four() {
        let s = compute_stats(&complete(4));
        assert_eq!(s.triangle_count, 4);
        assert_eq!(s.twopath_sum, 24);
        assert_eq!(s.global_cc, Some(1.0));
        assert_eq!(s.average_cc, 1.0);
        assert_eq!(empirical_sums(&complete(4)), (24, 24));
        assert_eq!(empirical_sums(&complete(3)), (6, 6));
    }

    #[test]
    fn path_and_star() {
        let path = AdjacencyList::from_edges(3, &[(0, 1), (1, 2)]);
        let s = compute_stats(&path);
        assert_eq!((s.triangle_count, s.twopath_sum), (0, 2));
        assert_eq!(s.global_cc, Some(0.0));
        assert_eq!(s.average_cc, 0.0);
        let star = AdjacencyList::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(empirical_sums(&star), (0, 6));
    }

    #[test]
    fn mixed_community_triangle() {
        // d(0,1) = 0.10 <= r_s, d(0,2) = d(1,2) = 0.05 <= r_d.
        let p = GbmParams::new(3, 2.0 / 3.0, 0.15, 0.06, 0).unwrap();
        let g = SampledGraph::from_positions(&p, vec![0.00, 0.10, 0.05]).unwrap();
        assert_eq!(p.n1(), 2);
        let s = compute_stats(&g.build_adjacency());
        assert_eq!(s.triangle_count, 1);
        assert_eq!(s.global_cc, Some(1.0));
        assert_eq!(brute_force_stats(&g).unwrap(), s);
    }

    #[test]
    fn empty_graph_is_flagged() {
        let p = GbmParams::new(20, 0.5, 0.0, 0.0, 4).unwrap();
        let g = SampledGraph::sample(&p);
        let s = brute_force_stats(&g).unwrap();
        assert_eq!(s.triangle_count, 0);
        assert_eq!(s.global_cc, None);
        assert_eq!(s.average_cc, 0.0);
        assert_eq!(compute_stats(&g.build_adjacency()), s);
    }

    #[test]
    fn isolated_node_rescales_average() {
        let base = complete(4);
        let mut edges = base.edges();
        edges.push((0, 1));
        let grown = AdjacencyList::from_edges(5, &edges);
        let (a, b) = (compute_stats(&base), compute_stats(&grown));
        assert_eq!(a.global_cc, b.global_cc);
        assert!((b.average_cc - a.average_cc * 4.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let p = GbmParams::new(600, 0.5, 0.01, 0.01, 0).unwrap();
        let g = SampledGraph::sample(&p);
        assert_eq!(brute_force_stats(&g), Err(OracleError::TooLarge { n: 600, cap: 512 }));
        assert!(brute_force_stats_capped(&g, 600).is_ok());
    }

    #[test]
    fn covering_arc_picks_largest_gap() {
        assert_eq!(covering_arc(&[], 8), None);
        assert_eq!(covering_arc(&[3], 8), Some((3, 1)));
        assert_eq!(covering_arc(&[2, 3, 4], 8), Some((2, 3)));
        assert_eq!(covering_arc(&[0, 1, 7], 8), Some((7, 3)));
        assert_eq!(covering_arc(&[0, 1, 2, 3], 4), Some((0, 4)));
    }

    #[test]
    fn locality_hint_does_not_change_counts() {
        let p = GbmParams::new(300, 0.4, 0.08, 0.03, 11).unwrap();
        let g = SampledGraph::sample(&p);
        let hinted = g.build_adjacency();
        let plain = AdjacencyList::from_edges(300, &hinted.edges());
        assert_eq!(compute_stats(&hinted), compute_stats(&plain));
        assert_eq!(
            compute_stats_with(&hinted, Exec::Sequential),
            compute_stats_with(&hinted, Exec::Parallel)
        );
    }
}
