//! Loss-minimal radial reconfiguration of switchable distribution networks.
//!
//! The crate finds the spanning-tree operating topology of a meshed grid that
//! minimizes source injection (equivalently, losses) under the AC power-flow
//! equations. Two radiality formulations are provided: one that constrains
//! every cycle of the network plus the energized-line count, and one that
//! constrains the count alone.
//!
//! * [`graph`]: cycle space, bridges and spanning trees.
//! * [`network`]: electrical data model and JSON files.
//! * [`power_flow`]: Newton-Raphson power flow for a fixed topology.
//! * [`reconfiguration`]: instance construction, propagation and exact search.
//! * [`oracle`]: brute-force references for verification.
//! * [`cli`]: the `reconf` command line.

pub mod cli;
pub mod graph;
pub mod network;
pub mod oracle;
pub mod power_flow;
pub mod reconfiguration;

pub use graph::{EdgeId, EdgeSet, Graph};
pub use network::{baseline_topology, load_network, Network, Topology};
pub use power_flow::{solve_power_flow, PfOptions, PfSolution};
pub use reconfiguration::{build_instance, solve, ModelKind, SolveOptions, SolveResult};
