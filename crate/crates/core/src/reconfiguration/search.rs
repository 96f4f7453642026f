use std::cmp::Ordering;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::propagate::{propagate, Propagation, SwitchState};
use super::report::delta_loss_pct;
use super::{ModelKind, ProblemInstance, ReconfError};
use crate::network::Topology;
use crate::power_flow::{solve_power_flow_with, PfOptions, PfSolution};

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(900);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub time_limit: Duration,
    pub pf: PfOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: DEFAULT_TIME_LIMIT,
            pf: PfOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub nodes_explored: usize,
    pub leaves_evaluated: usize,
    pub pf_solves: usize,
    pub pruned_by_bound: usize,
    pub pruned_by_propagation: usize,
    /// Leaves rejected by the connectivity pre-check (RR-DSR only).
    pub disconnected_leaves: usize,
    /// Leaves whose power flow failed.
    pub infeasible_leaves: usize,
    /// Seconds.
    pub wall_time: f64,
    /// `(seconds since start, objective)` at each incumbent update.
    pub incumbent_history: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub case: String,
    pub model: ModelKind,
    pub best: Topology,
    pub solution: PfSolution,
    pub f_obj: f64,
    pub p_loss: f64,
    /// Loss reduction relative to the MIP start, in percent.
    pub delta_loss_pct: f64,
    pub gamma_v_max: f64,
    pub gamma_s_max: f64,
    pub stats: SearchStats,
    pub proven_optimal: bool,
}

struct Incumbent {
    topology: Topology,
    solution: PfSolution,
}

impl Incumbent {
    /// Objective first, then the lexicographically smaller closed set.
    fn is_beaten_by(&self, topology: &Topology, solution: &PfSolution) -> bool {
        match solution.f_obj.total_cmp(&self.solution.f_obj) {
            Ordering::Less => true,
            Ordering::Equal => topology.closed() < self.topology.closed(),
            Ordering::Greater => false,
        }
    }
}

struct Search<'i, 'n> {
    inst: &'i ProblemInstance<'n>,
    opts: SolveOptions,
    start: Instant,
    lower_bound: f64,
    incumbent: Option<Incumbent>,
    stats: SearchStats,
    timed_out: bool,
}

/// Depth-first branch-and-bound over switch assignments.
///
/// Every node propagates the radiality constraints; a complete assignment is
/// evaluated with one power-flow solve. The bound at every node is the total
/// load, valid whenever all lines are passive.
pub fn solve(
    inst: &ProblemInstance<'_>,
    mip_start: &Topology,
    opts: &SolveOptions,
) -> Result<SolveResult, ReconfError> {
    let n = inst.network;
    let passive = n.lines().iter().all(|l| l.g >= 0.0 && l.g_sh >= 0.0);
    let mut search = Search {
        inst,
        opts: *opts,
        start: Instant::now(),
        lower_bound: if passive {
            n.total_load_p()
        } else {
            f64::NEG_INFINITY
        },
        incumbent: None,
        stats: SearchStats::default(),
        timed_out: false,
    };

    let start_loss = search.seed(mip_start);
    search.node(vec![SwitchState::Free; inst.var_count()]);
    search.stats.wall_time = search.start.elapsed().as_secs_f64();

    let Search {
        incumbent,
        stats,
        timed_out,
        ..
    } = search;
    let Incumbent { topology, solution } = incumbent.ok_or(ReconfError::AllInfeasible)?;
    Ok(SolveResult {
        case: n.name.clone(),
        model: inst.kind,
        delta_loss_pct: start_loss.map_or(0.0, |b| delta_loss_pct(b, solution.p_loss)),
        f_obj: solution.f_obj,
        p_loss: solution.p_loss,
        gamma_v_max: solution.gamma_v.iter().fold(0.0, |m: f64, &g| m.max(g)),
        gamma_s_max: solution.gamma_s.iter().fold(0.0, |m: f64, &g| m.max(g)),
        best: topology,
        solution,
        stats,
        proven_optimal: !timed_out,
    })
}

impl Search<'_, '_> {
    /// Installs the MIP start as the first incumbent when it is feasible for
    /// this instance. Returns its losses.
    fn seed(&mut self, mip_start: &Topology) -> Option<f64> {
        let Some(assignment) = self.inst.assignment_of(mip_start) else {
            log::warn!("MIP start opens a line that must stay closed; ignoring it");
            return None;
        };
        match propagate(self.inst, &assignment) {
            Propagation::Fixpoint(_) => {}
            Propagation::Conflict => {
                log::warn!("MIP start violates the radiality constraints; ignoring it");
                return None;
            }
        }
        if !self.connected(mip_start) {
            log::warn!("MIP start is disconnected; ignoring it");
            return None;
        }
        self.stats.pf_solves += 1;
        match solve_power_flow_with(self.inst.network, mip_start, &self.opts.pf) {
            Ok(sol) => {
                let loss = sol.p_loss;
                self.offer(mip_start.clone(), sol);
                Some(loss)
            }
            Err(e) => {
                log::warn!("MIP start power flow failed: {e}");
                None
            }
        }
    }

    fn connected(&self, t: &Topology) -> bool {
        let (g, active) = self.inst.network.to_graph(t);
        g.is_connected(&active)
    }

    fn offer(&mut self, topology: Topology, solution: PfSolution) {
        let better = self
            .incumbent
            .as_ref()
            .is_none_or(|inc| inc.is_beaten_by(&topology, &solution));
        if better {
            self.stats
                .incumbent_history
                .push((self.start.elapsed().as_secs_f64(), solution.f_obj));
            self.incumbent = Some(Incumbent { topology, solution });
        }
    }

    fn node(&mut self, assignment: Vec<SwitchState>) {
        if self.timed_out || self.start.elapsed() > self.opts.time_limit {
            self.timed_out = true;
            return;
        }
        self.stats.nodes_explored += 1;

        let assignment = match propagate(self.inst, &assignment) {
            Propagation::Fixpoint(a) => a,
            Propagation::Conflict => {
                self.stats.pruned_by_propagation += 1;
                return;
            }
        };
        if let Some(inc) = &self.incumbent {
            if self.lower_bound > inc.solution.f_obj {
                self.stats.pruned_by_bound += 1;
                return;
            }
        }

        match self.branch_var(&assignment) {
            None => self.leaf(&assignment),
            Some(k) => {
                for value in [SwitchState::Open, SwitchState::Closed] {
                    let mut child = assignment.clone();
                    child[k] = value;
                    self.node(child);
                }
            }
        }
    }

    /// Lowest free variable of the unsatisfied cycle with the fewest free
    /// variables; without one, the lowest free variable overall.
    fn branch_var(&self, assignment: &[SwitchState]) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for cycle in self.inst.cycle_vars() {
            if cycle.iter().any(|&k| assignment[k] == SwitchState::Open) {
                continue;
            }
            let free: Vec<usize> = cycle
                .iter()
                .copied()
                .filter(|&k| assignment[k] == SwitchState::Free)
                .collect();
            let Some(&lowest) = free.iter().min() else {
                continue;
            };
            if best.is_none_or(|(count, _)| free.len() < count) {
                best = Some((free.len(), lowest));
            }
        }
        best.map(|(_, k)| k)
            .or_else(|| assignment.iter().position(|s| *s == SwitchState::Free))
    }

    fn leaf(&mut self, assignment: &[SwitchState]) {
        self.stats.leaves_evaluated += 1;
        let topology = self.inst.topology(assignment);
        match self.inst.kind {
            ModelKind::Cdsr => debug_assert!({
                let (g, active) = self.inst.network.to_graph(&topology);
                g.is_tree(&active)
            }),
            ModelKind::Rrdsr => {
                if !self.connected(&topology) {
                    self.stats.disconnected_leaves += 1;
                    return;
                }
            }
        }
        self.stats.pf_solves += 1;
        match solve_power_flow_with(self.inst.network, &topology, &self.opts.pf) {
            Ok(sol) => self.offer(topology, sol),
            Err(e) => {
                log::debug!("leaf {:?} infeasible: {e}", topology.closed());
                self.stats.infeasible_leaves += 1;
            }
        }
    }
}
