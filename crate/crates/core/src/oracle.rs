//! Brute-force reference computations used to verify the solver.
//!
//! Nothing here touches the cycle basis, propagation or search code: cycles
//! come from filtering every edge subset, optima from running the power flow
//! on every spanning tree.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{enumerate_spanning_trees_with_cap, EdgeId, EdgeSet, Graph, GraphError};
use crate::network::{Network, Topology};
use crate::power_flow::{solve_power_flow_with, PfOptions};

/// Largest edge count [`brute_force_cycles`] accepts.
pub const MAX_BRUTE_FORCE_EDGES: usize = 24;
pub const MAX_ORACLE_TREES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{edges} edges is too many for subset enumeration")]
    TooLarge { edges: usize },
    #[error("more than {0} spanning trees")]
    TooManyTrees(usize),
    #[error("no spanning tree has a solvable power flow")]
    AllInfeasible,
    #[error(transparent)]
    Graph(GraphError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub optimum_f: f64,
    pub optimum_topology: Topology,
    /// Spanning trees that keep every non-switchable line.
    pub tree_count: usize,
    /// `|V| - 1`-edge subsets that keep every non-switchable line.
    pub subset_count: usize,
    /// Simple cycles of the full graph, when small enough to enumerate.
    pub cycle_count: Option<usize>,
}

/// Every edge subset that is connected and 2-regular on the vertices it
/// touches, in ascending subset-mask order.
pub fn brute_force_cycles(g: &Graph) -> Result<Vec<EdgeSet>, OracleError> {
    let m = g.edge_count();
    if m > MAX_BRUTE_FORCE_EDGES {
        return Err(OracleError::TooLarge { edges: m });
    }
    let ends: Vec<(usize, usize)> = g.edges().map(|(_, uv)| uv).collect();
    let mut out = Vec::new();
    let mut degree = vec![0u8; g.vertex_count()];
    for mask in 1u32..(1u32 << m) {
        degree.iter_mut().for_each(|d| *d = 0);
        let mut ok = true;
        for (i, &(u, v)) in ends.iter().enumerate() {
            if mask >> i & 1 == 1 {
                degree[u] += 1;
                degree[v] += 1;
                if degree[u] > 2 || degree[v] > 2 {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || degree.contains(&1) {
            continue;
        }
        if flood_connected(&ends, mask, &degree) {
            out.push(EdgeSet::from_ids(
                m,
                (0..m).filter(|i| mask >> i & 1 == 1).map(EdgeId),
            ));
        }
    }
    Ok(out)
}

/// Whether the edges in `mask` form one component over the touched vertices.
fn flood_connected(ends: &[(usize, usize)], mask: u32, degree: &[u8]) -> bool {
    let Some(start) = degree.iter().position(|&d| d > 0) else {
        return false;
    };
    let mut reached = vec![false; degree.len()];
    reached[start] = true;
    let mut grew = true;
    while grew {
        grew = false;
        for (i, &(u, v)) in ends.iter().enumerate() {
            if mask >> i & 1 == 1 && reached[u] != reached[v] {
                reached[u] = true;
                reached[v] = true;
                grew = true;
            }
        }
    }
    degree.iter().zip(&reached).all(|(&d, &r)| d == 0 || r)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

pub fn exhaustive_optimum(n: &Network) -> Result<OracleResult, OracleError> {
    exhaustive_optimum_with(n, &PfOptions::default())
}

/// Minimum-injection spanning tree by full enumeration, ties broken towards
/// the lexicographically smallest closed switch set.
pub fn exhaustive_optimum_with(n: &Network, pf: &PfOptions) -> Result<OracleResult, OracleError> {
    let g = n.graph();
    let trees = enumerate_spanning_trees_with_cap(g, MAX_ORACLE_TREES).map_err(|e| match e {
        GraphError::TooManyTrees { cap } => OracleError::TooManyTrees(cap),
        other => OracleError::Graph(other),
    })?;
    let fixed = n.fixed_lines();
    let switchable = n.switchable_lines();

    let mut tree_count = 0;
    let mut best: Option<(f64, Topology)> = None;
    for tree in trees.into_iter().filter(|t| fixed.is_subset(t)) {
        tree_count += 1;
        let topology = Topology::new(n, tree.intersection(&switchable)).expect("switchable subset");
        let Ok(sol) = solve_power_flow_with(n, &topology, pf) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((f, t)) => sol.f_obj < *f || (sol.f_obj == *f && topology.closed() < t.closed()),
        };
        if better {
            best = Some((sol.f_obj, topology));
        }
    }
    let (optimum_f, optimum_topology) = best.ok_or(OracleError::AllInfeasible)?;

    let to_close = (n.bus_count() - 1).saturating_sub(fixed.len());
    let cycle_count = brute_force_cycles(g).ok().map(|c| c.len());
    Ok(OracleResult {
        optimum_f,
        optimum_topology,
        tree_count,
        subset_count: binomial(switchable.len(), to_close),
        cycle_count,
    })
}
