//! Undirected simple graphs over bus indices.
//!
//! Connectivity and tree tests, fundamental cycle bases, all-cycle
//! enumeration over the cycle space, cycle-edge/bridge classification and
//! spanning-tree enumeration. Edge identifiers are dense `0..|E|` and every
//! traversal visits edges in ascending id order, so all outputs are
//! deterministic.

mod cycles;
mod dot;
mod edge_set;
mod trees;

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cycles::{
    cycle_edges, enumerate_all_cycles, enumerate_all_cycles_with_cap, fundamental_cycle_basis,
    Cycle, CycleBasis, DEFAULT_CYCLE_RANK_CAP,
};
pub use dot::to_dot;
pub use edge_set::EdgeSet;
pub use trees::{
    enumerate_spanning_trees, enumerate_spanning_trees_with_cap, spanning_tree, DEFAULT_TREE_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge between {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("edge endpoint {endpoint} out of range for {vertex_count} vertices")]
    VertexOutOfRange {
        endpoint: usize,
        vertex_count: usize,
    },
    #[error("graph is not connected")]
    NotConnected,
    #[error("cycle space too large: rank {rank} exceeds cap {cap}")]
    CycleSpaceTooLarge { rank: usize, cap: usize },
    #[error("more than {cap} spanning trees")]
    TooManyTrees { cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    /// Per vertex: (edge, neighbour), ascending by edge id.
    adjacency: Vec<Vec<(EdgeId, usize)>>,
}

impl Graph {
    /// Builds a graph whose edge `i` joins `edges[i]`.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for endpoint in [u, v] {
                if endpoint >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        endpoint,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::ParallelEdge(u.min(v), u.max(v)));
            }
            adjacency[u].push((EdgeId(id), v));
            adjacency[v].push((EdgeId(id), u));
        }
        Ok(Self {
            vertex_count,
            edges,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn endpoints(&self, e: EdgeId) -> (usize, usize) {
        self.edges[e.0]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, (usize, usize))> + '_ {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &uv)| (EdgeId(i), uv))
    }

    pub fn neighbours(&self, v: usize) -> &[(EdgeId, usize)] {
        &self.adjacency[v]
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edge_count())
    }

    pub fn no_edges(&self) -> EdgeSet {
        EdgeSet::empty(self.edge_count())
    }

    /// Cyclomatic number `|E| - |V| + 1` (for a connected graph).
    pub fn cyclomatic_number(&self) -> usize {
        (self.edge_count() + 1).saturating_sub(self.vertex_count)
    }

    /// Component label per vertex in the spanning subgraph `(V, active)`.
    pub fn components(&self, active: &EdgeSet) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.vertex_count {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(e, w) in &self.adjacency[u] {
                    if active.contains(e) && label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// True iff `(V, active)` is a single component covering every vertex.
    pub fn is_connected(&self, active: &EdgeSet) -> bool {
        self.vertex_count == 0 || self.components(active).0 == 1
    }

    /// True iff `(V, active)` contains no cycle.
    pub fn is_acyclic(&self, active: &EdgeSet) -> bool {
        let mut dsu = DisjointSets::new(self.vertex_count);
        active.iter().all(|e| {
            let (u, v) = self.edges[e.0];
            dsu.union(u, v)
        })
    }

    /// Tree test via connectivity: connected with `|V| - 1` edges.
    pub fn is_tree(&self, active: &EdgeSet) -> bool {
        active.len() + 1 == self.vertex_count && self.is_connected(active)
    }

    /// Tree test via acyclicity: no cycle with `|V| - 1` edges. Always agrees
    /// with [`Graph::is_tree`].
    pub fn is_tree_by_acyclicity(&self, active: &EdgeSet) -> bool {
        active.len() + 1 == self.vertex_count && self.is_acyclic(active)
    }

    /// Edges whose removal disconnects the graph.
    pub fn bridges(&self) -> Result<EdgeSet, GraphError> {
        let basis = fundamental_cycle_basis(self)?;
        Ok(cycle_edges(&basis).complement())
    }
}

/// Union-find with path halving.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i)).collect()).unwrap()
    }

    pub fn triangle() -> Graph {
        Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    pub fn star(leaves: usize) -> Graph {
        Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i)).collect()).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges).unwrap()
    }

    /// Two vertices joined by three internally disjoint paths of 2, 2 and 1 edges.
    pub fn theta() -> Graph {
        Graph::new(4, vec![(0, 2), (2, 1), (0, 3), (3, 1), (0, 1)]).unwrap()
    }

    /// Two triangles joined by the bridge edge 3.
    pub fn two_triangles() -> Graph {
        Graph::new(
            6,
            vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)],
        )
        .unwrap()
    }
}
