use serde::Serialize;

use super::ProblemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SwitchState {
    Free,
    Open,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    Fixpoint(Vec<SwitchState>),
    Conflict,
}

/// Unit propagation of the cycle and count constraints to a fixpoint.
///
/// A cycle with every variable closed but one free forces that one open; a
/// fully closed cycle is a conflict. Once the closed count reaches its
/// target the free variables open; once the open budget is spent they close.
pub fn propagate(inst: &ProblemInstance<'_>, partial: &[SwitchState]) -> Propagation {
    assert_eq!(partial.len(), inst.var_count(), "one state per variable");
    let mut state = partial.to_vec();
    let target = inst.required_closed_count;
    loop {
        let mut changed = false;

        for cycle in inst.cycle_vars() {
            let mut free = None;
            let mut free_count = 0;
            let mut has_open = false;
            for &k in cycle {
                match state[k] {
                    SwitchState::Open => {
                        has_open = true;
                        break;
                    }
                    SwitchState::Free => {
                        free = Some(k);
                        free_count += 1;
                    }
                    SwitchState::Closed => {}
                }
            }
            if has_open {
                continue;
            }
            match (free_count, free) {
                (0, _) => return Propagation::Conflict,
                (1, Some(k)) => {
                    state[k] = SwitchState::Open;
                    changed = true;
                }
                _ => {}
            }
        }

        let closed = state.iter().filter(|s| **s == SwitchState::Closed).count();
        let free = state.iter().filter(|s| **s == SwitchState::Free).count();
        if closed > target || closed + free < target {
            return Propagation::Conflict;
        }
        if free > 0 && (closed == target || closed + free == target) {
            let fill = if closed == target {
                SwitchState::Open
            } else {
                SwitchState::Closed
            };
            for s in state.iter_mut().filter(|s| **s == SwitchState::Free) {
                *s = fill;
            }
            changed = true;
        }

        if !changed {
            return Propagation::Fixpoint(state);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_instance, ModelKind};
    use super::SwitchState::{Closed, Free, Open};
    use super::*;
    use crate::network::{load_network, Network};

    fn fixture(name: &str) -> Network {
        load_network(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    #[test]
    fn triangle_with_two_closed_forces_third_open() {
        let n = fixture("tri3.json");
        let inst = build_instance(&n, ModelKind::Cdsr).unwrap();
        assert_eq!(
            propagate(&inst, &[Closed, Closed, Free]),
            Propagation::Fixpoint(vec![Closed, Closed, Open])
        );
    }

    #[test]
    fn count_target_reached_opens_the_rest() {
        let n = fixture("ring6.json");
        let inst = build_instance(&n, ModelKind::Rrdsr).unwrap();
        // 7 switches, 5 to close.
        assert_eq!(inst.required_closed_count, 5);
        let partial = [Closed, Closed, Closed, Closed, Closed, Free, Free];
        assert_eq!(
            propagate(&inst, &partial),
            Propagation::Fixpoint(vec![Closed, Closed, Closed, Closed, Closed, Open, Open])
        );
        let partial = [Open, Open, Free, Free, Free, Free, Free];
        assert_eq!(
            propagate(&inst, &partial),
            Propagation::Fixpoint(vec![Open, Open, Closed, Closed, Closed, Closed, Closed])
        );
    }

    #[test]
    fn fully_closed_cycle_conflicts() {
        let n = fixture("tri3.json");
        let inst = build_instance(&n, ModelKind::Cdsr).unwrap();
        assert_eq!(
            propagate(&inst, &[Closed, Closed, Closed]),
            Propagation::Conflict
        );
        // Without cycle constraints only the count is violated.
        let rr = build_instance(&n, ModelKind::Rrdsr).unwrap();
        assert_eq!(
            propagate(&rr, &[Closed, Closed, Closed]),
            Propagation::Conflict
        );
        assert_eq!(propagate(&rr, &[Open, Open, Free]), Propagation::Conflict);
    }

    #[test]
    fn cascades_between_constraints() {
        // Ring A (lines 0..4) and ring B (4..7) share bus 0. Closing three
        // lines of ring A forces the fourth open; with line 4 already open the
        // open budget is spent and the rest of ring B must close.
        let n = fixture("ring6.json");
        let inst = build_instance(&n, ModelKind::Cdsr).unwrap();
        let partial = [Closed, Closed, Closed, Free, Open, Free, Free];
        assert_eq!(
            propagate(&inst, &partial),
            Propagation::Fixpoint(vec![Closed, Closed, Closed, Open, Open, Closed, Closed])
        );
    }
}
