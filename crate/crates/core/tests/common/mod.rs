//! Helpers shared by the integration tests: fixture loading, seeded random
//! graphs and graph checks that do not go through the library.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reconf_core::graph::{enumerate_spanning_trees, EdgeId, EdgeSet, Graph};
use reconf_core::network::{load_network, Network, Topology};
use reconf_core::power_flow::{jacobian, mismatch, BusState};

/// Every bundled network.
pub const FIXTURES: [&str; 7] = [
    "bus2",
    "tri3",
    "treefix",
    "ring6",
    "export6",
    "twocycle8",
    "mesh12",
];

/// Fixtures with at least one switchable cycle.
pub const MESHED: [&str; 5] = ["tri3", "ring6", "export6", "twocycle8", "mesh12"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Network {
    load_network(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
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

/// Two vertices joined by three internally disjoint paths.
pub fn theta() -> Graph {
    Graph::new(4, vec![(0, 2), (2, 1), (0, 3), (3, 1), (0, 1)]).unwrap()
}

/// Each vertex pair joined with probability `p`, edge order shuffled.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push(if rng.random_bool(0.5) { (u, v) } else { (v, u) });
            }
        }
    }
    edges.shuffle(rng);
    Graph::new(n, edges).unwrap()
}

/// Random spanning tree plus up to `extra` chords, labels and edge order
/// shuffled.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut pairs = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((label[u].min(label[v]), label[u].max(label[v])));
    }
    let max_edges = n * (n - 1) / 2;
    let target = (pairs.len() + extra).min(max_edges);
    while pairs.len() < target {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    }
    let mut edges: Vec<(usize, usize)> = pairs.into_iter().collect();
    edges.shuffle(rng);
    Graph::new(n, edges).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, g: &Graph, p: f64) -> EdgeSet {
    EdgeSet::from_ids(
        g.edge_count(),
        (0..g.edge_count())
            .filter(|_| rng.random_bool(p))
            .map(EdgeId),
    )
}

/// Vertices reached from `start` over `active`, by repeated edge scans.
fn reached(g: &Graph, active: &EdgeSet, start: usize) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    seen[start] = true;
    let mut grew = true;
    while grew {
        grew = false;
        for (e, (u, v)) in g.edges() {
            if active.contains(e) && seen[u] != seen[v] {
                seen[u] = true;
                seen[v] = true;
                grew = true;
            }
        }
    }
    seen
}

pub fn naive_connected(g: &Graph, active: &EdgeSet) -> bool {
    g.vertex_count() == 0 || reached(g, active, 0).into_iter().all(|r| r)
}

/// Forest test by component counting: `|V| - |E|` components iff acyclic.
pub fn naive_acyclic(g: &Graph, active: &EdgeSet) -> bool {
    let mut seen = vec![false; g.vertex_count()];
    let mut components = 0;
    for v in 0..g.vertex_count() {
        if !seen[v] {
            components += 1;
            for (w, r) in reached(g, active, v).into_iter().enumerate() {
                seen[w] |= r;
            }
        }
    }
    components + active.len() == g.vertex_count()
}

/// Edges whose removal disconnects a connected graph.
pub fn naive_bridges(g: &Graph) -> EdgeSet {
    let all = g.all_edges();
    let mut out = g.no_edges();
    for e in all.iter() {
        let mut rest = all.clone();
        rest.remove(e);
        if !naive_connected(g, &rest) {
            out.insert(e);
        }
    }
    out
}

pub fn union_of(universe: usize, sets: &[EdgeSet]) -> EdgeSet {
    sets.iter()
        .fold(EdgeSet::empty(universe), |acc, s| acc.union(s))
}

/// Random voltages in `[0.9, 1.1]` and angles in `[-0.2, 0.2]` away from the
/// reference bus.
pub fn random_state(rng: &mut ChaCha8Rng, n: &Network) -> BusState {
    let mut x = BusState::flat(n);
    for bus in 0..n.bus_count() {
        if bus != n.ref_bus() {
            x.v_m[bus] = rng.random_range(0.9..1.1);
            x.theta[bus] = rng.random_range(-0.2..0.2);
        }
    }
    x
}

/// Central-difference Jacobian of the mismatch, columns in unknown order.
pub fn fd_jacobian(n: &Network, t: &Topology, x: &BusState, h: f64) -> Vec<Vec<f64>> {
    let others: Vec<usize> = (0..n.bus_count()).filter(|&b| b != n.ref_bus()).collect();
    let nu = others.len();
    let mut cols = Vec::with_capacity(2 * nu);
    for k in 0..2 * nu {
        let bus = others[k % nu];
        let (mut up, mut down) = (x.clone(), x.clone());
        if k < nu {
            up.theta[bus] += h;
            down.theta[bus] -= h;
        } else {
            up.v_m[bus] += h;
            down.v_m[bus] -= h;
        }
        let (fu, fd) = (mismatch(n, t, &up), mismatch(n, t, &down));
        cols.push(
            fu.iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    cols
}

/// Largest `|analytic - numeric| / max(1, |analytic|)` over all entries.
pub fn jacobian_rel_error(n: &Network, t: &Topology, x: &BusState) -> f64 {
    let analytic = jacobian(n, t, x);
    let numeric = fd_jacobian(n, t, x, 1e-6);
    let mut worst = 0.0f64;
    for (j, col) in numeric.iter().enumerate() {
        for (i, &d) in col.iter().enumerate() {
            let a = analytic[(i, j)];
            worst = worst.max((a - d).abs() / a.abs().max(1.0));
        }
    }
    worst
}

/// Every spanning tree that keeps the fixed lines, as a topology.
pub fn radial_topologies(n: &Network) -> Vec<Topology> {
    let fixed = n.fixed_lines();
    enumerate_spanning_trees(n.graph())
        .unwrap()
        .into_iter()
        .filter(|t| fixed.is_subset(t))
        .map(|t| Topology::new(n, t.intersection(&n.switchable_lines())).unwrap())
        .collect()
}
