//! The two-community geometric block model on the unit circle.
//!
//! Nodes get i.i.d. uniform positions on `[0, 1)` with the ends identified.
//! Two nodes are joined when their circular distance is at most `r_s` (same
//! community) or `r_d` (different communities).

use std::fmt;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Parameter validation failures. Each variant names the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("n: node count must be at least 1 (got {0})")]
    NoNodes(usize),
    #[error("{field}: value must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("tau: community fraction must lie in [0, 1] (got {0})")]
    TauOutOfRange(f64),
    #[error("{field}: radius must lie in [0, 0.5] (got {value})")]
    RadiusOutOfRange { field: &'static str, value: f64 },
    #[error("r_s: radius-order violation, r_s = {r_s} is smaller than r_d = {r_d}")]
    RadiusOrder { r_s: f64, r_d: f64 },
}

/// Community membership of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Community {
    One,
    Two,
}

impl Community {
    /// Numeric label used in text output (1 or 2).
    pub fn label(self) -> u8 {
        match self {
            Community::One => 1,
            Community::Two => 2,
        }
    }

    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            1 => Some(Community::One),
            2 => Some(Community::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Community {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A validated model tuple `(n, tau, r_s, r_d)` plus the RNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    n: usize,
    tau: f64,
    r_s: f64,
    r_d: f64,
    seed: u64,
    n1: usize,
}

fn check_radius(field: &'static str, value: f64) -> Result<(), ParamError> {
    if !value.is_finite() {
        return Err(ParamError::NotFinite { field, value });
    }
    if !(0.0..=0.5).contains(&value) {
        return Err(ParamError::RadiusOutOfRange { field, value });
    }
    Ok(())
}

/// Nearest integer to `tau * n`, ties rounded up. Products that land within
/// floating-point noise of a half-integer count as ties.
pub fn community_one_size(n: usize, tau: f64) -> usize {
    let x = tau * n as f64;
    let slack = 1e-12 * x.max(1.0);
    let n1 = (x + 0.5 + slack).floor();
    (n1.max(0.0) as usize).min(n)
}

impl GbmParams {
    /// Validates a candidate tuple. This is the only way to build `GbmParams`.
    pub fn new(n: usize, tau: f64, r_s: f64, r_d: f64, seed: u64) -> Result<Self, ParamError> {
        if n < 1 {
            return Err(ParamError::NoNodes(n));
        }
        if !tau.is_finite() {
            return Err(ParamError::NotFinite {
                field: "tau",
                value: tau,
            });
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(ParamError::TauOutOfRange(tau));
        }
        check_radius("r_s", r_s)?;
        check_radius("r_d", r_d)?;
        if r_s < r_d {
            return Err(ParamError::RadiusOrder { r_s, r_d });
        }
        Ok(GbmParams {
            n,
            tau,
            r_s,
            r_d,
            seed,
            n1: community_one_size(n, tau),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn r_s(&self) -> f64 {
        self.r_s
    }
    pub fn r_d(&self) -> f64 {
        self.r_d
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    /// Size of community one.
    pub fn n1(&self) -> usize {
        self.n1
    }
    /// Size of community two.
    pub fn n2(&self) -> usize {
        self.n - self.n1
    }

    /// Same model, different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Community of node `id`: the first `n1` ids are community one.
    pub fn community_of(&self, id: usize) -> Community {
        if id < self.n1 {
            Community::One
        } else {
            Community::Two
        }
    }

    /// Connection radius for a pair with the given labels.
    pub fn radius_for(&self, a: Community, b: Community) -> f64 {
        if a == b {
            self.r_s
        } else {
            self.r_d
        }
    }
}

/// Circular distance `min(|x - y|, 1 - |x - y|)`.
#[inline]
pub fn periodic_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

/// Arc length travelling counter-clockwise from `from` to `to`.
///
/// For any pair, `periodic_distance(x, y)` is bitwise equal to the smaller of
/// `forward_arc(x, y)` and `forward_arc(y, x)`.
#[inline]
fn forward_arc(from: f64, to: f64) -> f64 {
    if to >= from {
        to - from
    } else {
        1.0 - (from - to)
    }
}

/// Adjacency rule of the model; the comparison is inclusive.
#[inline]
pub fn edge_indicator(x_i: f64, z_i: Community, x_j: f64, z_j: Community, params: &GbmParams) -> bool {
    periodic_distance(x_i, x_j) <= params.radius_for(z_i, z_j)
}

/// Mixes a base seed with stream coordinates (SplitMix64 finalizer applied
/// per word), so every `(cell, replicate)` gets an independent stream that
/// does not depend on scheduling order.
pub fn derive_seed(base: u64, stream: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    stream.iter().fold(mix(base), |acc, &word| mix(acc ^ mix(word)))
}

/// Error for explicitly constructed graphs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("expected {expected} positions, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("position {value} of node {id} is outside [0, 1)")]
    PositionOutOfRange { id: usize, value: f64 },
}

/// Positions and labels for one realisation of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    params: GbmParams,
    positions: Vec<f64>,
    labels: Vec<Community>,
    sorted_index: Vec<usize>,
}

fn sort_by_position(positions: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]).then(a.cmp(&b)));
    order
}

impl SampledGraph {
    /// Draws positions from a ChaCha8 stream seeded with `params.seed()`.
    pub fn sample(params: &GbmParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let positions: Vec<f64> = (0..params.n).map(|_| rng.random::<f64>()).collect();
        Self::assemble(*params, positions)
    }

    /// Builds a graph from given positions; labels follow the usual
    /// id-prefix rule of `params`.
    pub fn from_positions(params: &GbmParams, positions: Vec<f64>) -> Result<Self, GraphError> {
        if positions.len() != params.n {
            return Err(GraphError::LengthMismatch {
                expected: params.n,
                got: positions.len(),
            });
        }
        if let Some((id, &value)) = positions.iter().enumerate().find(|(_, p)| !(0.0..1.0).contains(*p)) {
            return Err(GraphError::PositionOutOfRange { id, value });
        }
        Ok(Self::assemble(*params, positions))
    }

    fn assemble(params: GbmParams, positions: Vec<f64>) -> Self {
        let labels = (0..params.n).map(|i| params.community_of(i)).collect();
        let sorted_index = sort_by_position(&positions);
        SampledGraph {
            params,
            positions,
            labels,
            sorted_index,
        }
    }

    pub fn params(&self) -> &GbmParams {
        &self.params
    }
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
    pub fn labels(&self) -> &[Community] {
        &self.labels
    }
    /// Node ids in nondecreasing position order.
    pub fn sorted_index(&self) -> &[usize] {
        &self.sorted_index
    }
    pub fn len(&self) -> usize {
        self.positions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Edge test between two node ids of this graph.
    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j
            && edge_indicator(
                self.positions[i],
                self.labels[i],
                self.positions[j],
                self.labels[j],
                &self.params,
            )
    }

    /// Materialises the edge set with a sweep over the position order.
    ///
    /// From each node we walk counter-clockwise until the arc exceeds `r_s`,
    /// the largest radius in the model. Every edge is found from at least one
    /// endpoint because the circular distance is the smaller of the two arcs.
    pub fn build_adjacency(&self) -> AdjacencyList {
        let n = self.len();
        let r_max = self.params.r_s;
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (rank, &a) in self.sorted_index.iter().enumerate() {
            let xa = self.positions[a];
            for step in 1..n {
                let b = self.sorted_index[(rank + step) % n];
                if forward_arc(xa, self.positions[b]) > r_max {
                    break;
                }
                if self.adjacent(a, b) {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let mut adj = AdjacencyList::from_sorted_lists(neighbors);
        adj.locality_order = Some(self.sorted_index.clone());
        adj
    }

    /// All-pairs construction; the reference the sweep is tested against.
    pub fn build_adjacency_all_pairs(&self) -> AdjacencyList {
        let n = self.len();
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| self.adjacent(i, j)).collect())
            .collect();
        AdjacencyList::from_sorted_lists(neighbors)
    }

    /// Writes the text dump: one `id position label` line per node, then one
    /// `i j` line per undirected edge with `i < j`. Ids are zero-based.
    pub fn write_dump<W: Write>(&self, adj: &AdjacencyList, mut out: W) -> io::Result<()> {
        for (id, (&x, &z)) in self.positions.iter().zip(&self.labels).enumerate() {
            writeln!(out, "{id} {} {z}", crate::fmt_f64(x))?;
        }
        for (i, list) in adj.neighbors.iter().enumerate() {
            for &j in list.iter().filter(|&&j| j > i) {
                writeln!(out, "{i} {j}")?;
            }
        }
        out.flush()
    }
}

/// Parsed contents of a graph dump.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDump {
    pub positions: Vec<f64>,
    pub labels: Vec<Community>,
    pub adjacency: AdjacencyList,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads the format produced by [`SampledGraph::write_dump`].
pub fn read_dump<R: BufRead>(input: R) -> Result<GraphDump, DumpError> {
    let bad = |line: usize, message: String| DumpError::Malformed { line, message };
    let mut positions = Vec::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [id, x, z] => {
                if !edges.is_empty() {
                    return Err(bad(lineno, "node line after edge lines".into()));
                }
                let id: usize = id.parse().map_err(|e| bad(lineno, format!("id: {e}")))?;
                if id != positions.len() {
                    return Err(bad(lineno, format!("expected node id {}, got {id}", positions.len())));
                }
                let x: f64 = x.parse().map_err(|e| bad(lineno, format!("position: {e}")))?;
                let z = z
                    .parse::<u8>()
                    .ok()
                    .and_then(Community::from_label)
                    .ok_or_else(|| bad(lineno, format!("label must be 1 or 2, got {z}")))?;
                positions.push(x);
                labels.push(z);
            }
            [i, j] => {
                let i: usize = i.parse().map_err(|e| bad(lineno, format!("edge: {e}")))?;
                let j: usize = j.parse().map_err(|e| bad(lineno, format!("edge: {e}")))?;
                edges.push((lineno, i, j));
            }
            _ => return Err(bad(lineno, format!("expected 2 or 3 fields, got {}", fields.len()))),
        }
    }
    let n = positions.len();
    let mut neighbors = vec![Vec::new(); n];
    for (lineno, i, j) in edges {
        if i >= n || j >= n || i == j {
            return Err(bad(lineno, format!("invalid edge {i} {j} for {n} nodes")));
        }
        neighbors[i].push(j);
        neighbors[j].push(i);
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    Ok(GraphDump {
        positions,
        labels,
        adjacency: AdjacencyList::from_sorted_lists(neighbors),
    })
}

/// Undirected simple graph as per-node sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyList {
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
    /// Node ids in an order where neighborhoods are contiguous (for sampled
    /// graphs, the position order). Only a performance hint.
    locality_order: Option<Vec<usize>>,
}

impl AdjacencyList {
    fn from_sorted_lists(neighbors: Vec<Vec<usize>>) -> Self {
        let edge_count = neighbors.iter().map(Vec::len).sum::<usize>() / 2;
        AdjacencyList {
            neighbors,
            edge_count,
            locality_order: None,
        }
    }

    /// Builds a graph on `n` nodes from an edge list. Self-loops and
    /// duplicates are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for {n} nodes");
            if i != j {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_sorted_lists(neighbors)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }
    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }
    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }
    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }
    pub fn locality_order(&self) -> Option<&[usize]> {
        self.locality_order.as_deref()
    }

    /// Membership test on the sorted list of `i`.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Sorted list of undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// Same edge set, ignoring the locality hint.
    pub fn same_edges(&self, other: &AdjacencyList) -> bool {
        self.neighbors == other.neighbors
    }
}
