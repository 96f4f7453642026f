use serde::Serialize;

use super::trees::bfs_tree;
use super::{EdgeId, EdgeSet, Graph, GraphError};

/// Largest cycle-space rank accepted by [`enumerate_all_cycles`]; the
/// enumeration visits `2^rank - 1` basis combinations.
pub const DEFAULT_CYCLE_RANK_CAP: usize = 20;

/// A simple cycle: a connected edge set in which every touched vertex has
/// degree exactly two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Cycle {
    edges: EdgeSet,
}

impl Cycle {
    /// Validates `edges` against the cycle invariant.
    pub fn new(g: &Graph, edges: EdgeSet) -> Option<Self> {
        is_simple_cycle(g, &edges).then_some(Self { edges })
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn into_edges(self) -> EdgeSet {
        self.edges
    }
}

pub(crate) fn is_simple_cycle(g: &Graph, edges: &EdgeSet) -> bool {
    if edges.is_empty() {
        return false;
    }
    let mut degree = vec![0u32; g.vertex_count()];
    for e in edges.iter() {
        let (u, v) = g.endpoints(e);
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut touched = 0;
    for &d in &degree {
        match d {
            0 => {}
            2 => touched += 1,
            _ => return false,
        }
    }
    if touched != edges.len() {
        return false;
    }
    // Walk the cycle from one edge; 2-regularity makes the walk unique.
    let first = edges.iter().next().expect("non-empty");
    let (start, mut at) = g.endpoints(first);
    let mut via = first;
    let mut steps = 1;
    while at != start {
        let Some(&(e, w)) = g
            .neighbours(at)
            .iter()
            .find(|(e, _)| *e != via && edges.contains(*e))
        else {
            return false;
        };
        via = e;
        at = w;
        steps += 1;
    }
    steps == edges.len()
}

/// Fundamental cycles of the breadth-first spanning tree, one per chord.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleBasis {
    pub cycles: Vec<Cycle>,
    /// `chord_of[k]` is the chord defining `cycles[k]`.
    pub chord_of: Vec<EdgeId>,
    universe: usize,
}

impl CycleBasis {
    /// Rank of the cycle space.
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Symmetric difference of the basis cycles selected by `mask`.
    pub fn combine(&self, mask: u64) -> EdgeSet {
        let mut acc = EdgeSet::empty(self.universe);
        for (k, c) in self.cycles.iter().enumerate() {
            if mask >> k & 1 == 1 {
                acc.symmetric_difference_with(c.edges());
            }
        }
        acc
    }
}

pub fn fundamental_cycle_basis(g: &Graph) -> Result<CycleBasis, GraphError> {
    let (tree, parent) = bfs_tree(g)?;
    let mut depth = vec![0usize; g.vertex_count()];
    for (v, depth) in depth.iter_mut().enumerate() {
        let mut at = v;
        while let Some((_, p)) = parent[at] {
            *depth += 1;
            at = p;
        }
    }

    let mut cycles = Vec::new();
    let mut chord_of = Vec::new();
    for (e, (u, v)) in g.edges() {
        if tree.contains(e) {
            continue;
        }
        let mut edges = g.no_edges();
        edges.insert(e);
        let (mut a, mut b) = (u, v);
        while a != b {
            if depth[a] >= depth[b] {
                let (pe, p) = parent[a].expect("non-root vertex has a parent");
                edges.insert(pe);
                a = p;
            } else {
                let (pe, p) = parent[b].expect("non-root vertex has a parent");
                edges.insert(pe);
                b = p;
            }
        }
        cycles.push(Cycle { edges });
        chord_of.push(e);
    }
    Ok(CycleBasis {
        cycles,
        chord_of,
        universe: g.edge_count(),
    })
}

pub fn enumerate_all_cycles(g: &Graph) -> Result<Vec<Cycle>, GraphError> {
    enumerate_all_cycles_with_cap(g, DEFAULT_CYCLE_RANK_CAP)
}

/// All simple cycles, each once, sorted by length then by ascending edge ids.
///
/// Walks the nonzero elements of the cycle space in Gray-code order (one
/// symmetric difference per step) and keeps the elements that are simple
/// cycles.
pub fn enumerate_all_cycles_with_cap(g: &Graph, cap: usize) -> Result<Vec<Cycle>, GraphError> {
    let basis = fundamental_cycle_basis(g)?;
    let rank = basis.len();
    if rank > cap || rank >= 64 {
        return Err(GraphError::CycleSpaceTooLarge { rank, cap });
    }
    let mut out = Vec::new();
    let mut current = EdgeSet::empty(g.edge_count());
    for step in 1u64..(1u64 << rank) {
        let flip = step.trailing_zeros() as usize;
        current.symmetric_difference_with(basis.cycles[flip].edges());
        if is_simple_cycle(g, &current) {
            out.push(Cycle {
                edges: current.clone(),
            });
        }
    }
    out.sort_by(|a, b| (a.len(), &a.edges).cmp(&(b.len(), &b.edges)));
    Ok(out)
}

/// Union of the basis cycles' edge sets: exactly the edges lying on some cycle.
pub fn cycle_edges(basis: &CycleBasis) -> EdgeSet {
    let mut acc = EdgeSet::empty(basis.universe);
    for c in &basis.cycles {
        acc.union_with(c.edges());
    }
    acc
}
