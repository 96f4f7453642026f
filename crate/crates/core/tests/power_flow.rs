mod common;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reconf_core::graph::EdgeId;
use reconf_core::network::{baseline_topology, Line, Network, NetworkData, Topology};
use reconf_core::power_flow::{
    branch_flow, jacobian, mismatch, solve_power_flow, solve_power_flow_with, BusState, PfError,
    PfOptions,
};

use common::*;

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

/// `S = V_f * conj((y + y_sh) V_f - y V_t)`.
fn complex_flow(v_f: f64, v_t: f64, th_f: f64, th_t: f64, l: &Line) -> Complex64 {
    let vf = Complex64::from_polar(v_f, th_f);
    let vt = Complex64::from_polar(v_t, th_t);
    let y = Complex64::new(l.g, l.b);
    let y_sh = Complex64::new(l.g_sh, l.b_sh);
    vf * ((y + y_sh) * vf - y * vt).conj()
}

#[test]
fn branch_flow_matches_complex_power() {
    for l in [
        line(2.0, -5.0, 0.0, 0.0),
        line(2.0, -5.0, 0.01, 0.03),
        line(0.7, 3.0, 0.0, -0.2),
    ] {
        for (vf, vt, tf, tt) in [
            (1.02, 0.98, 0.05, 0.0),
            (0.97, 1.01, -0.1, 0.2),
            (1.0, 1.0, 0.0, 0.0),
        ] {
            let (p, q) = branch_flow(vf, vt, tf, tt, &l);
            let s = complex_flow(vf, vt, tf, tt, &l);
            assert!((p - s.re).abs() < 1e-12, "p {p} vs {}", s.re);
            assert!((q - s.im).abs() < 1e-12, "q {q} vs {}", s.im);
        }
    }
}

#[test]
fn two_bus_matches_bisection() {
    let n = fixture("bus2");
    let g = n.lines()[0].g;
    let load = n.loads()[0].p;
    // Receiving-end balance g v^2 - g v + p = 0 on the high-voltage branch.
    let residual = |v: f64| g * v * v - g * v + load;
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    let sol = solve_power_flow(&n, &baseline_topology(&n)).unwrap();
    assert!((sol.v_m[1] - v).abs() < 1e-9, "{} vs {v}", sol.v_m[1]);
    assert!(sol.theta[1].abs() < 1e-12);
    assert!((sol.f_obj - g * (1.0 - v)).abs() < 1e-9);
    assert!((sol.p_loss - (sol.f_obj - load)).abs() < 1e-12);
}

#[test]
fn converged_solutions_are_consistent() {
    for name in FIXTURES {
        let n = fixture(name);
        for t in radial_topologies(&n) {
            let sol = solve_power_flow(&n, &t).unwrap();
            assert!(sol.converged && sol.residual < 1e-8, "{name}");
            assert!(sol.iterations <= PfOptions::default().max_iter);
            let x = BusState {
                v_m: sol.v_m.clone(),
                theta: sol.theta.clone(),
            };
            let fresh = mismatch(&n, &t, &x);
            assert!(fresh.iter().all(|m| m.abs() < 1e-8), "{name}");
            assert!(
                (sol.f_obj - n.total_load_p() - sol.p_loss).abs() < 1e-8,
                "{name}: energy identity {:e} residual {:e}",
                sol.f_obj - n.total_load_p() - sol.p_loss,
                sol.residual
            );
            assert!(sol.p_loss >= -1e-12, "{name}: negative losses");
            assert_eq!(sol.v_m[n.ref_bus()], n.v_ref());
            assert_eq!(sol.theta[n.ref_bus()], 0.0);
            for l in n.lines() {
                let [pf, pt] = sol.p_flow[l.id.0];
                if t.is_closed(&n, l.id) {
                    assert!(pf + pt >= -1e-12, "{name} line {}", l.id);
                } else {
                    assert_eq!(
                        (sol.p_flow[l.id.0], sol.q_flow[l.id.0]),
                        ([0.0; 2], [0.0; 2])
                    );
                }
            }
        }
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for name in FIXTURES {
        let n = fixture(name);
        for t in [baseline_topology(&n), Topology::all_closed(&n)] {
            for _ in 0..20 {
                let x = random_state(&mut rng, &n);
                let err = jacobian_rel_error(&n, &t, &x);
                assert!(err < 1e-6, "{name}: {err:e}");
            }
        }
    }
}

#[test]
fn opening_a_bridge_is_singular() {
    let n = fixture("twocycle8");
    let bridge = n.graph().bridges().unwrap();
    assert_eq!(bridge.ids(), vec![4]);
    let closed = n.switchable_lines().difference(&bridge);
    let t = Topology::new(&n, closed).unwrap();
    assert_eq!(solve_power_flow(&n, &t), Err(PfError::Singular));
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let n = fixture("ring6");
    let opts = PfOptions {
        tol: 1e-8,
        max_iter: 1,
    };
    match solve_power_flow_with(&n, &baseline_topology(&n), &opts) {
        Err(PfError::NonConverged {
            iterations,
            residual,
        }) => {
            assert_eq!(iterations, 1);
            assert!(residual > 1e-8);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn meshed_operation_solves() {
    let n = fixture("mesh12");
    let sol = solve_power_flow(&n, &Topology::all_closed(&n)).unwrap();
    assert!(sol.residual < 1e-8);
    assert!((sol.f_obj - n.total_load_p() - sol.p_loss).abs() < 1e-8);
}

#[test]
fn bus_relabeling_permutes_the_jacobian() {
    let n = fixture("ring6");
    let data = n.to_data();
    assert_eq!(n.ref_bus(), 0);
    // Non-reference buses reversed.
    let nb = n.bus_count();
    let perm = |b: usize| if b == 0 { 0 } else { nb - b };
    let mut relabeled: NetworkData = data.clone();
    for b in &mut relabeled.buses {
        b.id = perm(b.id);
    }
    for l in &mut relabeled.lines {
        l.from = perm(l.from);
        l.to = perm(l.to);
    }
    for load in &mut relabeled.loads {
        load.bus = perm(load.bus);
    }
    let m = Network::from_data(relabeled).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_state(&mut rng, &n);
    let mut y = x.clone();
    for b in 0..nb {
        y.v_m[perm(b)] = x.v_m[b];
        y.theta[perm(b)] = x.theta[b];
    }
    let t = baseline_topology(&n);
    let u = Topology::new(&m, t.closed().clone()).unwrap();
    let (ja, jb) = (jacobian(&n, &t, &x), jacobian(&m, &u, &y));
    let nu = nb - 1;
    // Unknown k belongs to bus k + 1.
    let slot = |k: usize| {
        let (half, k) = (k / nu, k % nu);
        half * nu + perm(k + 1) - 1
    };
    for i in 0..2 * nu {
        for j in 0..2 * nu {
            assert!((ja[(i, j)] - jb[(slot(i), slot(j))]).abs() < 1e-12);
        }
    }
    let (sa, sb) = (
        solve_power_flow(&n, &t).unwrap(),
        solve_power_flow(&m, &u).unwrap(),
    );
    assert!((sa.f_obj - sb.f_obj).abs() < 1e-12);
    for b in 0..nb {
        assert!((sa.v_m[b] - sb.v_m[perm(b)]).abs() < 1e-10);
    }
}
