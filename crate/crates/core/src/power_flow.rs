//! Per-topology AC power flow in polar coordinates.
//!
//! The reference bus holds `(v_ref, 0)`; every other bus is a PQ bus whose
//! real and reactive balance is solved by Newton's method from a flat start.
//! Only energized lines enter the balance, so open switches carry exactly
//! zero flow at both ends.
//!
//! Unknowns are ordered `[theta of non-reference buses, v_m of non-reference
//! buses]`, both ascending by bus id; mismatches are ordered `[P, Q]` the same
//! way.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, EdgeSet};
use crate::network::{Line, Network, Topology};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PfOptions {
    /// Max-norm mismatch tolerance (p.u.).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PfOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfError {
    /// Jacobian could not be factorized: some bus is cut off from the
    /// reference bus, or the operating point is degenerate.
    #[error("singular jacobian (disconnected or degenerate topology)")]
    Singular,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConverged { iterations: usize, residual: f64 },
}

/// Bus voltages in polar form, one entry per bus.
#[derive(Clone, Debug, PartialEq)]
pub struct BusState {
    pub v_m: Vec<f64>,
    pub theta: Vec<f64>,
}

impl BusState {
    pub fn flat(n: &Network) -> Self {
        Self {
            v_m: vec![n.v_ref(); n.bus_count()],
            theta: vec![0.0; n.bus_count()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfSolution {
    pub v_m: Vec<f64>,
    pub theta: Vec<f64>,
    /// Real flow per line as `[from end, to end]`, each leaving its bus.
    pub p_flow: Vec<[f64; 2]>,
    pub q_flow: Vec<[f64; 2]>,
    /// Injection per source.
    pub p_g: Vec<f64>,
    pub q_g: Vec<f64>,
    pub f_obj: f64,
    pub p_loss: f64,
    pub gamma_v: Vec<f64>,
    pub gamma_s: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final max-norm mismatch.
    pub residual: f64,
}

/// Flow leaving the `from` bus of `line` given both terminal voltages.
pub fn branch_flow(v_f: f64, v_t: f64, theta_f: f64, theta_t: f64, line: &Line) -> (f64, f64) {
    let d = theta_f - theta_t;
    let (s, c) = d.sin_cos();
    let p = v_f * v_f * (line.g + line.g_sh) - v_f * v_t * (line.g * c + line.b * s);
    let q = -v_f * v_f * (line.b + line.b_sh) + v_f * v_t * (line.b * c - line.g * s);
    (p, q)
}

/// Partials of the flow leaving one line end with respect to
/// `(theta_here, theta_there, v_here, v_there)`.
struct EndFlow {
    dp: [f64; 4],
    dq: [f64; 4],
}

fn end_flow(v_f: f64, v_t: f64, theta_f: f64, theta_t: f64, line: &Line) -> EndFlow {
    let (g, b) = (line.g, line.b);
    let (gg, bb) = (line.g + line.g_sh, line.b + line.b_sh);
    let (s, c) = (theta_f - theta_t).sin_cos();
    let re = g * c + b * s;
    let im = b * c - g * s;
    let vv = v_f * v_t;
    let dp_dth = vv * (g * s - b * c);
    let dq_dth = -vv * (b * s + g * c);
    EndFlow {
        dp: [dp_dth, -dp_dth, 2.0 * v_f * gg - v_t * re, -v_f * re],
        dq: [dq_dth, -dq_dth, -2.0 * v_f * bb + v_t * im, v_f * im],
    }
}

/// Balance equations of one network under one topology.
struct PfModel<'a> {
    net: &'a Network,
    active: Vec<EdgeId>,
    /// Position of each bus among the unknowns; `None` for the reference bus.
    slot: Vec<Option<usize>>,
    unknowns: usize,
    loads: Vec<(f64, f64)>,
}

impl<'a> PfModel<'a> {
    fn new(net: &'a Network, t: &Topology) -> Self {
        let active = t.active(net).iter().collect();
        let mut slot = vec![None; net.bus_count()];
        let mut k = 0;
        for (bus, s) in slot.iter_mut().enumerate() {
            if bus != net.ref_bus() {
                *s = Some(k);
                k += 1;
            }
        }
        Self {
            net,
            active,
            slot,
            unknowns: k,
            loads: net.bus_loads(),
        }
    }

    /// Net flow leaving each bus into the energized lines.
    fn outflows(&self, x: &BusState) -> (Vec<f64>, Vec<f64>) {
        let nb = self.net.bus_count();
        let (mut p, mut q) = (vec![0.0; nb], vec![0.0; nb]);
        for &e in &self.active {
            let l = self.net.line(e);
            let (f, t) = (l.from, l.to);
            let (pf, qf) = branch_flow(x.v_m[f], x.v_m[t], x.theta[f], x.theta[t], l);
            let (pt, qt) = branch_flow(x.v_m[t], x.v_m[f], x.theta[t], x.theta[f], l);
            p[f] += pf;
            q[f] += qf;
            p[t] += pt;
            q[t] += qt;
        }
        (p, q)
    }

    fn mismatch(&self, x: &BusState) -> Vec<f64> {
        let (p, q) = self.outflows(x);
        let mut out = vec![0.0; 2 * self.unknowns];
        for (bus, s) in self.slot.iter().enumerate() {
            if let Some(k) = *s {
                out[k] = p[bus] + self.loads[bus].0;
                out[self.unknowns + k] = q[bus] + self.loads[bus].1;
            }
        }
        out
    }

    fn jacobian(&self, x: &BusState) -> DMatrix<f64> {
        let nu = self.unknowns;
        let mut jac = DMatrix::zeros(2 * nu, 2 * nu);
        for &e in &self.active {
            let l = self.net.line(e);
            for (here, there) in [(l.from, l.to), (l.to, l.from)] {
                let Some(row) = self.slot[here] else {
                    continue;
                };
                let fl = end_flow(x.v_m[here], x.v_m[there], x.theta[here], x.theta[there], l);
                for (i, bus) in [(0, here), (1, there)] {
                    if let Some(col) = self.slot[bus] {
                        jac[(row, col)] += fl.dp[i];
                        jac[(nu + row, col)] += fl.dq[i];
                        jac[(row, nu + col)] += fl.dp[2 + i];
                        jac[(nu + row, nu + col)] += fl.dq[2 + i];
                    }
                }
            }
        }
        jac
    }

    fn apply_step(&self, x: &mut BusState, dx: &DVector<f64>) {
        for (bus, s) in self.slot.iter().enumerate() {
            if let Some(k) = *s {
                x.theta[bus] += dx[k];
                x.v_m[bus] += dx[self.unknowns + k];
            }
        }
    }

    fn reaches_all_buses(&self) -> bool {
        let active = EdgeSet::from_ids(self.net.line_count(), self.active.iter().copied());
        self.net.graph().is_connected(&active)
    }
}

/// Mismatch vector at `state`: net outflow plus load at each non-reference
/// bus, real parts first.
pub fn mismatch(n: &Network, t: &Topology, state: &BusState) -> Vec<f64> {
    PfModel::new(n, t).mismatch(state)
}

/// Analytic partials of [`mismatch`] with respect to the unknowns.
pub fn jacobian(n: &Network, t: &Topology, state: &BusState) -> DMatrix<f64> {
    PfModel::new(n, t).jacobian(state)
}

fn max_norm(v: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for x in v {
        if x.is_nan() {
            return f64::NAN;
        }
        m = m.max(x.abs());
    }
    m
}

/// Sum of the absolute real-power mismatches. Bounding it keeps the source
/// injection within `tol` of load plus losses.
fn real_imbalance(f: &[f64], unknowns: usize) -> f64 {
    f[..unknowns].iter().map(|x| x.abs()).sum()
}

/// Relative pivot size below which the Newton system counts as singular.
const PIVOT_TOL: f64 = 1e-12;

fn newton_step(jac: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>, PfError> {
    let lu = jac.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if scale.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        || diag.iter().any(|d| d.abs() <= PIVOT_TOL * scale)
    {
        return Err(PfError::Singular);
    }
    lu.solve(&rhs).ok_or(PfError::Singular)
}

pub fn solve_power_flow(n: &Network, t: &Topology) -> Result<PfSolution, PfError> {
    solve_power_flow_with(n, t, &PfOptions::default())
}

/// Newton-Raphson from a flat start. Stops once the max-norm mismatch and
/// the summed real-power mismatch are both below `opts.tol`.
pub fn solve_power_flow_with(
    n: &Network,
    t: &Topology,
    opts: &PfOptions,
) -> Result<PfSolution, PfError> {
    let model = PfModel::new(n, t);
    if !model.reaches_all_buses() {
        return Err(PfError::Singular);
    }
    let mut x = BusState::flat(n);
    let mut f = model.mismatch(&x);
    let mut residual = max_norm(&f);
    let mut iterations = 0;
    while !(residual < opts.tol && real_imbalance(&f, model.unknowns) < opts.tol) {
        if iterations == opts.max_iter || residual.is_nan() {
            return Err(PfError::NonConverged {
                iterations,
                residual,
            });
        }
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let dx = newton_step(model.jacobian(&x), rhs)?;
        model.apply_step(&mut x, &dx);
        iterations += 1;
        f = model.mismatch(&x);
        residual = max_norm(&f);
        log::trace!("newton iteration {iterations}: residual {residual:e}");
    }
    Ok(assemble(&model, x, iterations, residual))
}

fn assemble(model: &PfModel<'_>, x: BusState, iterations: usize, residual: f64) -> PfSolution {
    let n = model.net;
    let mut p_flow = vec![[0.0; 2]; n.line_count()];
    let mut q_flow = vec![[0.0; 2]; n.line_count()];
    for &e in &model.active {
        let l = n.line(e);
        let (pf, qf) = branch_flow(
            x.v_m[l.from],
            x.v_m[l.to],
            x.theta[l.from],
            x.theta[l.to],
            l,
        );
        let (pt, qt) = branch_flow(
            x.v_m[l.to],
            x.v_m[l.from],
            x.theta[l.to],
            x.theta[l.from],
            l,
        );
        p_flow[e.0] = [pf, pt];
        q_flow[e.0] = [qf, qt];
    }
    let (p_out, q_out) = model.outflows(&x);
    let (p_g, q_g): (Vec<f64>, Vec<f64>) = n
        .sources()
        .iter()
        .map(|s| {
            (
                p_out[s.bus] + model.loads[s.bus].0,
                q_out[s.bus] + model.loads[s.bus].1,
            )
        })
        .unzip();
    let mut sol = PfSolution {
        v_m: x.v_m,
        theta: x.theta,
        p_flow,
        q_flow,
        p_g,
        q_g,
        f_obj: 0.0,
        p_loss: 0.0,
        gamma_v: Vec::new(),
        gamma_s: Vec::new(),
        iterations,
        converged: true,
        residual,
    };
    let (f_obj, p_loss) = objective_and_losses(n, &sol);
    sol.f_obj = f_obj;
    sol.p_loss = p_loss;
    let (gamma_v, gamma_s) = violations(n, &sol);
    sol.gamma_v = gamma_v;
    sol.gamma_s = gamma_s;
    sol
}

/// Post-hoc limit violations: per bus, the distance outside
/// `[v_min, v_max]`; per line, the excess of `p^2 + q^2` over `s_max^2` at
/// the worse end. Zero when the limit holds.
pub fn violations(n: &Network, sol: &PfSolution) -> (Vec<f64>, Vec<f64>) {
    let gamma_v = n
        .buses()
        .iter()
        .zip(&sol.v_m)
        .map(|(b, &v)| voltage_violation(v, b.v_min, b.v_max))
        .collect();
    let gamma_s = n
        .lines()
        .iter()
        .map(|l| {
            let [pf, pt] = sol.p_flow[l.id.0];
            let [qf, qt] = sol.q_flow[l.id.0];
            rating_violation(pf, qf, l.s_max).max(rating_violation(pt, qt, l.s_max))
        })
        .collect();
    (gamma_v, gamma_s)
}

pub fn voltage_violation(v: f64, v_min: f64, v_max: f64) -> f64 {
    if v < v_min || v > v_max {
        (v_min - v).max(v - v_max)
    } else {
        0.0
    }
}

pub fn rating_violation(p: f64, q: f64, s_max: f64) -> f64 {
    let excess = p * p + q * q - s_max * s_max;
    if excess > 0.0 {
        excess
    } else {
        0.0
    }
}

/// `(sum of source injections, sum over lines of both end flows)`.
pub fn objective_and_losses(n: &Network, sol: &PfSolution) -> (f64, f64) {
    let _ = n;
    let f_obj = sol.p_g.iter().sum();
    let p_loss = sol.p_flow.iter().map(|[a, b]| a + b).sum();
    (f_obj, p_loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{baseline_topology, NetworkData};

    fn line(g: f64, b: f64, g_sh: f64, b_sh: f64) -> Line {
        Line {
            id: EdgeId(0),
            from: 0,
            to: 1,
            g,
            b,
            g_sh,
            b_sh,
            s_max: 1.0,
            switchable: false,
            baseline_closed: true,
        }
    }

    #[test]
    fn flat_state_flows() {
        let (p, q) = branch_flow(1.0, 1.0, 0.0, 0.0, &line(3.0, -7.0, 0.0, 0.0));
        assert!(p.abs() < 1e-15 && q.abs() < 1e-15);
        let (p, q) = branch_flow(1.0, 1.0, 0.0, 0.0, &line(3.0, -7.0, 0.01, 0.02));
        assert!((p - 0.01).abs() < 1e-15);
        assert!((q + 0.02).abs() < 1e-15);
    }

    #[test]
    fn end_partials_match_central_differences() {
        let l = line(2.0, -5.0, 0.01, 0.03);
        let x = [0.07, 0.02, 1.02, 0.98];
        let fl = end_flow(x[2], x[3], x[0], x[1], &l);
        let h = 1e-6;
        for i in 0..4 {
            let (mut lo, mut hi) = (x, x);
            lo[i] -= h;
            hi[i] += h;
            let (p0, q0) = branch_flow(lo[2], lo[3], lo[0], lo[1], &l);
            let (p1, q1) = branch_flow(hi[2], hi[3], hi[0], hi[1], &l);
            assert!((fl.dp[i] - (p1 - p0) / (2.0 * h)).abs() < 1e-7, "dp[{i}]");
            assert!((fl.dq[i] - (q1 - q0) / (2.0 * h)).abs() < 1e-7, "dq[{i}]");
        }
    }

    #[test]
    fn violation_formulas() {
        assert_eq!(voltage_violation(1.0, 0.95, 1.05), 0.0);
        assert!((voltage_violation(1.06, 0.95, 1.05) - 0.01).abs() < 1e-12);
        assert!((voltage_violation(0.93, 0.95, 1.05) - 0.02).abs() < 1e-12);
        assert_eq!(voltage_violation(1.05, 0.95, 1.05), 0.0);
        assert!((rating_violation(0.4, 0.3, 0.45) - 0.0475).abs() < 1e-12);
        assert_eq!(rating_violation(0.3, 0.4, 0.5), 0.0);
    }

    #[test]
    fn zero_load_stays_flat() {
        let mut d: NetworkData =
            serde_json::from_str(include_str!("../fixtures/ring6.json")).unwrap();
        d.loads.clear();
        for l in &mut d.lines {
            l.b_sh = 0.0;
            l.g_sh = 0.0;
        }
        let n = Network::from_data(d).unwrap();
        let sol = solve_power_flow(&n, &baseline_topology(&n)).unwrap();
        assert!(sol.v_m.iter().all(|&v| (v - n.v_ref()).abs() < 1e-12));
        assert!(sol.theta.iter().all(|&a| a.abs() < 1e-12));
        assert!(sol.f_obj.abs() < 1e-12 && sol.p_loss.abs() < 1e-12);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let n = Network::from_json(include_str!("../fixtures/ring6.json")).unwrap();
        let opts = PfOptions {
            tol: 1e-8,
            max_iter: 1,
        };
        assert!(matches!(
            solve_power_flow_with(&n, &baseline_topology(&n), &opts),
            Err(PfError::NonConverged { iterations: 1, .. })
        ));
    }
}
