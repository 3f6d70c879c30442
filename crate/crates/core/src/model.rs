//! Bandit environments and their graph structure.
//!
//! Arms are graph vertices. For a `K x L` rank-one instance the vertex of
//! entry `(i, j)` is `i * L + j` (row-major, 0-indexed) everywhere in the
//! crate, including the files written by the CLI.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;

use crate::stats::Probability;
use crate::{Error, Result};

/// Matrix entry, 0-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
}

impl Entry {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

fn validate_probabilities(field: &str, values: &[f64]) -> Result<()> {
    for (i, &x) in values.iter().enumerate() {
        Probability::checked(format!("{field}[{i}]"), x)?;
    }
    Ok(())
}

/// Index of the unique maximum, or `None` when the maximum is tied.
fn unique_argmax(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut hits = values.iter().enumerate().filter(|(_, &x)| x == max);
    let first = hits.next()?.0;
    hits.next().is_none().then_some(first)
}

/// Bernoulli rank-one bandit: the mean of entry `(i, j)` is `u[i] * v[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneInstance {
    u: Vec<f64>,
    v: Vec<f64>,
    best_row: usize,
    best_col: usize,
}

impl RankOneInstance {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        for (field, x) in [("u", &u), ("v", &v)] {
            if x.len() < 2 {
                return Err(Error::TooFewEntries {
                    field: field.into(),
                    min: 2,
                    got: x.len(),
                });
            }
            validate_probabilities(field, x)?;
            if x.iter().all(|&e| e == 0.0) {
                return Err(Error::ZeroVector { field: field.into() });
            }
        }
        let best_row = unique_argmax(&u).ok_or(Error::NonUniqueArgmax { field: "u".into() })?;
        let best_col = unique_argmax(&v).ok_or(Error::NonUniqueArgmax { field: "v".into() })?;
        let positive = |x: &[f64]| x.iter().all(|&e| e > 0.0);
        if !positive(&u) && !positive(&v) {
            return Err(Error::NotPositive);
        }
        Ok(Self {
            u,
            v,
            best_row,
            best_col,
        })
    }

    /// The `K x K` family with `u = v = (0.75, 0.25, ..., 0.25)`, best entry `(0, 0)`.
    pub fn benchmark(k: usize) -> Result<Self> {
        let mut u = vec![0.25; k];
        if let Some(first) = u.first_mut() {
            *first = 0.75;
        }
        Self::new(u.clone(), u)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn rows(&self) -> usize {
        self.u.len()
    }

    pub fn cols(&self) -> usize {
        self.v.len()
    }

    pub fn arm_count(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn best_entry(&self) -> Entry {
        Entry::new(self.best_row, self.best_col)
    }

    pub fn mean(&self, e: Entry) -> f64 {
        self.u[e.row] * self.v[e.col]
    }

    pub fn vertex(&self, e: Entry) -> usize {
        e.row * self.cols() + e.col
    }

    pub fn entry(&self, vertex: usize) -> Entry {
        Entry::new(vertex / self.cols(), vertex % self.cols())
    }

    /// Row-major flattened means `u vᵀ`.
    pub fn means_matrix(&self) -> Vec<f64> {
        self.u
            .iter()
            .flat_map(|&ui| self.v.iter().map(move |&vj| ui * vj))
            .collect()
    }

    /// Strictly increasing path of at most two G1 edges from `from` to the best entry.
    ///
    /// Same row or column as the optimum: the direct edge. Otherwise through
    /// `(i*, j)` when `v[j] > 0`, else through `(i, j*)`.
    pub fn increasing_path(&self, from: Entry) -> Result<Vec<Entry>> {
        if from.row >= self.rows() || from.col >= self.cols() {
            return Err(Error::EntryOutOfRange {
                row: from.row,
                col: from.col,
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let star = self.best_entry();
        if from == star {
            return Err(Error::StartIsOptimal(star.row, star.col));
        }
        if from.row == star.row || from.col == star.col {
            return Ok(vec![from, star]);
        }
        let via = if self.v[from.col] > 0.0 {
            Entry::new(star.row, from.col)
        } else {
            Entry::new(from.row, star.col)
        };
        Ok(vec![from, via, star])
    }
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodalGraph {
    adjacency: Vec<Vec<usize>>,
    // N⁺(k): neighbors plus k itself, sorted
    closed: Vec<Vec<usize>>,
}

impl UnimodalGraph {
    /// Builds the graph from an edge list. Duplicate edges are merged.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in edges {
            for x in [a, b] {
                if x >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: x,
                        count: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfEdge(a));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_adjacency(adjacency))
    }

    fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Self {
        let closed = adjacency
            .iter()
            .enumerate()
            .map(|(k, list)| {
                let mut c = list.clone();
                let pos = c.partition_point(|&x| x < k);
                c.insert(pos, k);
                c
            })
            .collect();
        Self { adjacency, closed }
    }

    /// The rook-move graph on a `rows x cols` matrix: distinct entries are
    /// adjacent when they share a row or a column.
    pub fn g1(rows: usize, cols: usize) -> Result<Self> {
        for (field, n) in [("K", rows), ("L", cols)] {
            if n < 2 {
                return Err(Error::TooFewEntries {
                    field: field.into(),
                    min: 2,
                    got: n,
                });
            }
        }
        let adjacency = (0..rows * cols)
            .map(|vertex| {
                let (i, j) = (vertex / cols, vertex % cols);
                (0..rows * cols)
                    .filter(|&w| w != vertex && (w / cols == i || w % cols == j))
                    .collect()
            })
            .collect();
        Ok(Self::from_adjacency(adjacency))
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.adjacency[k]
    }

    /// `N⁺(k)`, the neighborhood of `k` including `k`.
    pub fn extended_neighborhood(&self, k: usize) -> &[usize] {
        &self.closed[k]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.adjacency[k].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Largest shortest-path distance, `None` if the graph is disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let n = self.vertex_count();
        let mut best = 0;
        for source in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adjacency[x] {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            best = best.max(*dist.iter().max()?);
            if best == usize::MAX {
                return None;
            }
        }
        Some(best)
    }
}

/// Why a mean vector is not unimodal on a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The global maximum is attained at several vertices.
    DuplicateMaximizer(Vec<usize>),
    /// A non-optimal vertex with no strictly better neighbor.
    LocalMaximum(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateMaximizer(v) => write!(f, "global maximum attained at vertices {v:?}"),
            Violation::LocalMaximum(k) => write!(f, "vertex {k} is a strict local maximum"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Unimodal { optimum: usize },
    Violation(Violation),
}

impl Verdict {
    pub fn is_unimodal(&self) -> bool {
        matches!(self, Verdict::Unimodal { .. })
    }
}

/// Local unimodality test: a unique maximizer, and every other vertex has a
/// strictly better neighbor. On a finite graph greedy ascent then always
/// reaches the maximizer, which is equivalent to an increasing path existing
/// from every vertex.
pub fn check_unimodal(graph: &UnimodalGraph, means: &[f64]) -> Result<Verdict> {
    if means.len() != graph.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: graph.vertex_count(),
            got: means.len(),
        });
    }
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maximizers: Vec<usize> = (0..means.len()).filter(|&k| means[k] == max).collect();
    if maximizers.len() != 1 {
        return Ok(Verdict::Violation(Violation::DuplicateMaximizer(maximizers)));
    }
    let optimum = maximizers[0];
    for k in (0..means.len()).filter(|&k| k != optimum) {
        if !graph.neighbors(k).iter().any(|&w| means[w] > means[k]) {
            return Ok(Verdict::Violation(Violation::LocalMaximum(k)));
        }
    }
    Ok(Verdict::Unimodal { optimum })
}

/// Means that are unimodal on their graph.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalInstance {
    graph: UnimodalGraph,
    means: Vec<f64>,
    optimum: usize,
}

impl UnimodalInstance {
    pub fn new(graph: UnimodalGraph, means: Vec<f64>) -> Result<Self> {
        validate_probabilities("means", &means)?;
        match check_unimodal(&graph, &means)? {
            Verdict::Unimodal { optimum } => Ok(Self {
                graph,
                means,
                optimum,
            }),
            Verdict::Violation(v) => Err(Error::NotUnimodal(v)),
        }
    }

    pub fn graph(&self) -> &UnimodalGraph {
        &self.graph
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn optimum(&self) -> usize {
        self.optimum
    }
}

/// Either kind of environment the harness can run.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    RankOne(RankOneInstance),
    Graph(UnimodalInstance),
}

impl Instance {
    /// Materialises the graph and means. For rank-one instances this builds
    /// G1 and verifies unimodality on it.
    pub fn to_unimodal(&self) -> Result<UnimodalInstance> {
        match self {
            Instance::RankOne(r) => {
                UnimodalInstance::new(UnimodalGraph::g1(r.rows(), r.cols())?, r.means_matrix())
            }
            Instance::Graph(g) => Ok(g.clone()),
        }
    }

    pub fn arm_count(&self) -> usize {
        match self {
            Instance::RankOne(r) => r.arm_count(),
            Instance::Graph(g) => g.means().len(),
        }
    }
}

/// Bernoulli reward for `arm`. Consumes exactly one uniform draw.
pub fn sample_reward<R: Rng + ?Sized>(means: &[f64], arm: usize, rng: &mut R) -> Result<u8> {
    let mean = *means.get(arm).ok_or(Error::VertexOutOfRange {
        vertex: arm,
        count: means.len(),
    })?;
    Ok(u8::from(rng.random::<f64>() < mean))
}
