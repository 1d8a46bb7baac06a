//! Directed communication graphs and their augmented form.
//!
//! Agents are indexed `0..n` in the API. The JSON and CSV formats use 1-based
//! indices, converted at the boundary. Edges are kept in lexicographic
//! `(source, destination)` order; the `k`-th edge owns virtual agent `n + k`
//! in the augmented graph.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed, strongly connected digraph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    edge_ids: HashMap<(usize, usize), usize>,
    out_neighbors: Vec<Vec<usize>>,
    in_neighbors: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Validates and builds a graph from 0-based edges.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut sorted = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for endpoint in [i, j] {
                if endpoint >= n {
                    return Err(Error::EndpointOutOfRange { endpoint, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            sorted.push((i, j));
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }

        let mut out_neighbors = vec![Vec::new(); n];
        let mut in_neighbors = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut edge_ids = HashMap::with_capacity(sorted.len());
        for (k, &(i, j)) in sorted.iter().enumerate() {
            out_neighbors[i].push(j);
            in_neighbors[j].push(i);
            out_edges[i].push(k);
            in_edges[j].push(k);
            edge_ids.insert((i, j), k);
        }
        let g = DirectedGraph {
            n,
            edges: sorted,
            edge_ids,
            out_neighbors,
            in_neighbors,
            out_edges,
            in_edges,
        };
        if let Some((from, to)) = g.unreachable_pair() {
            return Err(Error::NotStronglyConnected { from, to });
        }
        Ok(g)
    }

    /// Builds a graph from 1-based edges, as used by the file formats.
    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut zero = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for endpoint in [i, j] {
                if endpoint == 0 || endpoint > n {
                    return Err(Error::EndpointOutOfRange { endpoint, n });
                }
            }
            zero.push((i - 1, j - 1));
        }
        Self::new(n, &zero)
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn ring(n: usize) -> Result<Self> {
        let edges: Vec<_> = if n < 2 {
            Vec::new()
        } else {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        };
        Self::new(n, &edges)
    }

    /// Ring with links in both directions.
    pub fn bidirectional_ring(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        if n == 2 {
            edges = vec![(0, 1), (1, 0)];
        } else if n > 2 {
            for i in 0..n {
                edges.push((i, (i + 1) % n));
                edges.push(((i + 1) % n, i));
            }
        }
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        Self::new(n, &edges)
    }

    /// A directed Hamiltonian cycle over a random permutation, plus each
    /// remaining ordered pair independently with probability `extra`.
    pub fn random_strongly_connected<R: Rng + ?Sized>(
        n: usize,
        extra: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let k = rng.gen_range(0..=i);
            order.swap(i, k);
        }
        let mut present = vec![vec![false; n]; n];
        if n > 1 {
            for k in 0..n {
                present[order[k]][order[(k + 1) % n]] = true;
            }
        }
        for (i, row) in present.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j && !*cell && rng.gen::<f64>() < extra {
                    *cell = true;
                }
            }
        }
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| present[i][j])
            .collect();
        Self::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges in lexicographic order; the position is the edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_id(&self, src: usize, dst: usize) -> Option<usize> {
        self.edge_ids.get(&(src, dst)).copied()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors[i].len()
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.n).map(|i| self.out_degree(i)).max().unwrap_or(0)
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_neighbors[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    /// Ids of edges leaving `i`, ordered by destination.
    pub fn out_edges(&self, i: usize) -> &[usize] {
        &self.out_edges[i]
    }

    /// Ids of edges entering `i`, ordered by source.
    pub fn in_edges(&self, i: usize) -> &[usize] {
        &self.in_edges[i]
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.unreachable_pair().is_none()
    }

    // Forward and backward reachability from agent 0 covers every ordered pair.
    fn unreachable_pair(&self) -> Option<(usize, usize)> {
        let forward = reach(self.n, 0, &self.out_neighbors);
        if let Some(to) = forward.iter().position(|&seen| !seen) {
            return Some((0, to));
        }
        let backward = reach(self.n, 0, &self.in_neighbors);
        backward.iter().position(|&seen| !seen).map(|from| (from, 0))
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        }
    }
}

fn reach(n: usize, start: usize, adjacency: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Free-function form of [`DirectedGraph::is_strongly_connected`].
pub fn is_strongly_connected(g: &DirectedGraph) -> bool {
    g.is_strongly_connected()
}

/// JSON form of a graph: `{ "n": 3, "edges": [[1, 2], [2, 3], [3, 1]] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<DirectedGraph> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        DirectedGraph::from_one_based(self.n, &edges)
    }
}

/// Whether an augmented node is an original agent or a link buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Real,
    Virtual,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Real => "real",
            NodeKind::Virtual => "virtual",
        }
    }
}

/// The base graph plus one buffer agent per directed link.
///
/// Augmented ids `0..n` are the real agents; id `n + k` buffers edge `k`,
/// with the edge source as its only in-neighbor and the edge destination as
/// its only out-neighbor.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    base: DirectedGraph,
}

impl AugmentedGraph {
    pub fn new(base: DirectedGraph) -> Self {
        AugmentedGraph { base }
    }

    pub fn base(&self) -> &DirectedGraph {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    /// Total node count `n + |E|`.
    pub fn m(&self) -> usize {
        self.base.n + self.base.edges.len()
    }

    pub fn virtual_index(&self, src: usize, dst: usize) -> Option<usize> {
        self.base.edge_id(src, dst).map(|k| self.base.n + k)
    }

    /// Inverse of [`Self::virtual_index`].
    pub fn edge_of(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(self.base.n)
            .and_then(|k| self.base.edges.get(k).copied())
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        if node < self.base.n {
            NodeKind::Real
        } else {
            NodeKind::Virtual
        }
    }

    /// The unique in-neighbor of a virtual node (the edge source).
    pub fn virtual_in_neighbor(&self, node: usize) -> Option<usize> {
        self.edge_of(node).map(|(src, _)| src)
    }

    /// The unique out-neighbor of a virtual node (the edge destination).
    pub fn virtual_out_neighbor(&self, node: usize) -> Option<usize> {
        self.edge_of(node).map(|(_, dst)| dst)
    }
}

pub fn augment(g: &DirectedGraph) -> AugmentedGraph {
    AugmentedGraph::new(g.clone())
}
