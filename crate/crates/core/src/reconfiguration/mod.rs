//! Radial reconfiguration: instance construction, propagation, exact search
//! and result reporting.
//!
//! Both formulations share the switch set and the edge-count constraint.
//! C-DSR additionally requires every cycle of the network to miss at least
//! one energized line; RR-DSR omits those constraints and relies on the
//! power flow to reject disconnected topologies.
//!
//! Only lines lying on some cycle can ever be opened (removing a bridge
//! disconnects the grid), so bridges are fixed closed and the count
//! constraint is restated over the remaining switches.
//!
//! With a single slack bus a fixed topology determines a unique power-flow
//! state, so the search runs over switch assignments alone and evaluates each
//! complete assignment with one Newton solve.

mod propagate;
mod report;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    cycle_edges, enumerate_all_cycles_with_cap, fundamental_cycle_basis, EdgeId, EdgeSet,
    GraphError, DEFAULT_CYCLE_RANK_CAP,
};
use crate::network::{Network, Topology};

pub use propagate::{propagate, Propagation, SwitchState};
pub use report::{delta_loss_pct, report, write_csv, ReportRow, CSV_HEADER};
pub use search::{solve, SearchStats, SolveOptions, SolveResult, DEFAULT_TIME_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "C-DSR")]
    Cdsr,
    #[serde(rename = "RR-DSR")]
    Rrdsr,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Cdsr => "C-DSR",
            ModelKind::Rrdsr => "RR-DSR",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cdsr" | "c-dsr" => Ok(ModelKind::Cdsr),
            "rrdsr" | "rr-dsr" => Ok(ModelKind::Rrdsr),
            other => Err(format!("unknown model `{other}` (expected cdsr or rrdsr)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconfError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no radial topology satisfies the fixed lines")]
    NoRadialTopology,
    #[error("every candidate topology is infeasible")]
    AllInfeasible,
}

/// One reconfiguration problem over a network.
///
/// Decision variables are the switches in `switchable`, indexed `0..` in
/// ascending line id order (see [`ProblemInstance::vars`]).
#[derive(Clone, Debug)]
pub struct ProblemInstance<'a> {
    pub network: &'a Network,
    pub kind: ModelKind,
    /// Switches that may open: switch-equipped cycle-edges.
    pub switchable: EdgeSet,
    /// Every other line; energized in every feasible topology.
    pub fixed_closed: EdgeSet,
    /// Edge sets of all cycles (C-DSR only).
    pub all_cycles: Vec<EdgeSet>,
    /// Number of switchable lines that must be closed:
    /// `|V| - 1 - |fixed_closed|`.
    pub required_closed_count: usize,
    vars: Vec<EdgeId>,
    cycle_vars: Vec<Vec<usize>>,
}

pub fn build_instance(n: &Network, kind: ModelKind) -> Result<ProblemInstance<'_>, ReconfError> {
    build_instance_with_cap(n, kind, DEFAULT_CYCLE_RANK_CAP)
}

pub fn build_instance_with_cap(
    n: &Network,
    kind: ModelKind,
    cycle_rank_cap: usize,
) -> Result<ProblemInstance<'_>, ReconfError> {
    let g = n.graph();
    let basis = fundamental_cycle_basis(g)?;
    let switchable = cycle_edges(&basis).intersection(&n.switchable_lines());
    let fixed_closed = switchable.complement();
    let required_closed_count = (g.vertex_count() - 1)
        .checked_sub(fixed_closed.len())
        .filter(|&k| k <= switchable.len())
        .ok_or(ReconfError::NoRadialTopology)?;

    let vars: Vec<EdgeId> = switchable.iter().collect();
    let mut var_of = vec![None; n.line_count()];
    for (k, e) in vars.iter().enumerate() {
        var_of[e.0] = Some(k);
    }

    let all_cycles: Vec<EdgeSet> = match kind {
        ModelKind::Cdsr => enumerate_all_cycles_with_cap(g, cycle_rank_cap)?
            .into_iter()
            .map(|c| c.into_edges())
            .collect(),
        ModelKind::Rrdsr => Vec::new(),
    };
    let cycle_vars: Vec<Vec<usize>> = all_cycles
        .iter()
        .map(|c| c.iter().filter_map(|e| var_of[e.0]).collect())
        .collect();
    if cycle_vars.iter().any(Vec::is_empty) {
        return Err(ReconfError::NoRadialTopology);
    }

    Ok(ProblemInstance {
        network: n,
        kind,
        switchable,
        fixed_closed,
        all_cycles,
        required_closed_count,
        vars,
        cycle_vars,
    })
}

impl ProblemInstance<'_> {
    /// Line of each decision variable.
    pub fn vars(&self) -> &[EdgeId] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Per cycle, the decision variables lying on it.
    pub fn cycle_vars(&self) -> &[Vec<usize>] {
        &self.cycle_vars
    }

    /// Topology energizing the fixed lines plus the closed variables.
    pub fn topology(&self, assignment: &[SwitchState]) -> Topology {
        let n = self.network;
        let mut closed = self.fixed_closed.intersection(&n.switchable_lines());
        for (k, s) in assignment.iter().enumerate() {
            if *s == SwitchState::Closed {
                closed.insert(self.vars[k]);
            }
        }
        Topology::new(n, closed).expect("closed lines are switchable")
    }

    /// Full assignment read off a topology, or `None` when the topology opens
    /// a line this instance keeps closed.
    pub fn assignment_of(&self, t: &Topology) -> Option<Vec<SwitchState>> {
        let n = self.network;
        if self.fixed_closed.iter().any(|e| !t.is_closed(n, e)) {
            return None;
        }
        Some(
            self.vars
                .iter()
                .map(|&e| {
                    if t.is_closed(n, e) {
                        SwitchState::Closed
                    } else {
                        SwitchState::Open
                    }
                })
                .collect(),
        )
    }
}
