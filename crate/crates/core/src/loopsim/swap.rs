//! Intra-loop two-qubit interaction through the port.

use super::{Action, LoopState, TimedSchedule, TimingParams};
use crate::error::{Error, Result};
use crate::rational::{circ, q, Q};
use num_traits::Zero;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SwapOptions {
    /// Exchange the two qubits physically instead of applying a gate.
    pub physical: bool,
    /// Port dwell charged for re-synchronising uneven spacing (physical variant only).
    pub resync: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapOutcome {
    pub schedule: TimedSchedule,
    /// Shuttling in laps.
    #[serde(serialize_with = "super::ser_q")]
    pub shuttle_laps: Q,
    #[serde(serialize_with = "super::ser_q")]
    pub total: Q,
    pub first: usize,
    /// The two tokens ended in each other's slots.
    pub labels_exchanged: bool,
}

/// Shuttle laps for tokens at `pa`, `pb`: the closer one enters first (tie: a).
pub fn swap_cost(pa: Q, pb: Q) -> Q {
    let (f, s) = if circ(pa) <= circ(pb) { (pa, pb) } else { (pb, pa) };
    circ(f) + circ(s - f) * 2
}

/// Fetch both tokens into the port, interact, and return each to its slot.
pub fn swap_protocol(
    st: &mut LoopState,
    a: usize,
    b: usize,
    gate: &str,
    params: &TimingParams,
    opts: &SwapOptions,
) -> Result<SwapOutcome> {
    if !st.port().is_empty() {
        return Err(Error::PortOccupied);
    }
    if a == b {
        return Err(Error::Precondition("swap needs two distinct tokens".into()));
    }
    let pa = st.position(a)?;
    let pb = st.position(b)?;
    let (f, s) = if circ(pa) <= circ(pb) { (a, b) } else { (b, a) };
    let mut sched = TimedSchedule { events: Vec::new(), makespan: st.clock };
    let t0 = st.clock;
    let d1 = st.bring_to(f, Q::zero(), &mut sched)?;
    st.enter(f, &mut sched)?;
    let d2 = st.bring_to(s, Q::zero(), &mut sched)?;
    if opts.physical {
        // f leaves into the slot s vacates; s is held to restore the spacing, then
        // returns to f's old slot.
        st.trade(&mut sched)?;
        st.hold(Action::Dwell { reason: "resync".into() }, vec![s], opts.resync, &mut sched);
        st.rotate(-d2, &mut sched);
        st.exit(&mut sched)?;
    } else {
        st.enter(s, &mut sched)?;
        st.hold(Action::Gate { name: gate.into() }, vec![f, s], params.t_2q, &mut sched);
        st.exit(&mut sched)?;
        st.rotate(-d2, &mut sched);
        st.exit(&mut sched)?;
    }
    let shuttle_laps = circ(d1) + circ(d2) * 2;
    Ok(SwapOutcome { total: st.clock - t0, schedule: sched, shuttle_laps, first: f, labels_exchanged: opts.physical })
}

/// Positions in a folded stack of n/2 patches: patch p has its upper-layer qubit at
/// `offset + p/n` and its mirrored qubit half a lap further.
pub fn stack_positions(n: usize, offset: Q) -> Vec<Q> {
    let k = n / 2;
    let mut v: Vec<Q> = (0..k).map(|p| offset + q(p as i64, n as i64)).collect();
    v.extend((0..k).map(|p| offset + q(p as i64, n as i64) + q(1, 2)));
    v
}

/// Laps for a transversal CNOT between patches i and j: two port passes, layer order
/// chosen to minimise shuttling.
pub fn cnot_stack_cost(n: usize, offset: Q, i: usize, j: usize) -> Result<Q> {
    check_stack(n, i, j)?;
    let k = n / 2;
    let pos = stack_positions(n, offset);
    let pass = |first: usize, second: usize| -> Q {
        let (x, y) = (pos[first * k + i], pos[first * k + j]);
        let c1 = swap_cost(x, y);
        let shift = if circ(x) <= circ(y) { -x } else { -y };
        let (u, v) = (pos[second * k + i] + shift, pos[second * k + j] + shift);
        c1 + swap_cost(u, v)
    };
    Ok(pass(0, 1).min(pass(1, 0)))
}

fn check_stack(n: usize, i: usize, j: usize) -> Result<()> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::Precondition(format!("a folded stack needs an even n >= 4, got {n}")));
    }
    if i == j {
        return Err(Error::SamePatch);
    }
    if i >= n / 2 || j >= n / 2 {
        return Err(Error::UnknownPatch(i.max(j) as u32));
    }
    Ok(())
}

/// Event-level simulation of the stack CNOT, cheaper layer order first.
pub fn cnot_stack(n: usize, offset: Q, i: usize, j: usize, params: &TimingParams) -> Result<SwapOutcome> {
    check_stack(n, i, j)?;
    let k = n / 2;
    let pos = stack_positions(n, offset);
    let mut best: Option<SwapOutcome> = None;
    for (first, second) in [(0, 1), (1, 0)] {
        let mut st = LoopState::from_positions(&pos, params.t_loop)?;
        let o = SwapOptions::default();
        let a = swap_protocol(&mut st, first * k + i, first * k + j, "CX", params, &o)?;
        let b = swap_protocol(&mut st, second * k + i, second * k + j, "CX", params, &o)?;
        let mut schedule = a.schedule;
        schedule.events.extend(b.schedule.events);
        schedule.makespan = b.schedule.makespan;
        let out = SwapOutcome {
            total: a.total + b.total,
            shuttle_laps: a.shuttle_laps + b.shuttle_laps,
            schedule,
            first: a.first,
            labels_exchanged: false,
        };
        if best.as_ref().is_none_or(|x| out.total < x.total) {
            best = Some(out);
        }
    }
    Ok(best.expect("two orders tried"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn opposite_worst_case() {
        let p = TimingParams::silicon();
        let mut st = LoopState::from_positions(&[q(1, 4), q(3, 4)], p.t_loop).unwrap();
        let o = swap_protocol(&mut st, 0, 1, "CX", &p, &SwapOptions::default()).unwrap();
        assert_eq!(o.shuttle_laps, q(5, 4));
        assert_eq!(o.total, q(5, 4) * p.t_loop + p.t_2q);
        assert!(o.schedule.tokens_disjoint());
    }

    #[test]
    fn opposite_tokens_cost_one_lap() {
        let p = TimingParams::silicon();
        let mut st = LoopState::from_positions(&[qi(0), q(1, 2)], p.t_loop).unwrap();
        let o = swap_protocol(&mut st, 0, 1, "CX", &p, &SwapOptions::default()).unwrap();
        assert_eq!(o.shuttle_laps, qi(1));
        assert_eq!(o.schedule.shuttle_time(), p.t_loop);
    }

    #[test]
    fn adjacent_and_returned() {
        let p = TimingParams::silicon();
        let mut st = LoopState::evenly_spaced(8, q(1, 32), p.t_loop);
        let before = st.cyclic_order_from(0);
        swap_protocol(&mut st, 3, 4, "CX", &p, &SwapOptions::default()).unwrap();
        assert_eq!(st.cyclic_order_from(0), before);
        assert!(st.port().is_empty());
    }

    #[test]
    fn physical_variant_exchanges_slots() {
        let p = TimingParams::silicon();
        let mut st = LoopState::evenly_spaced(4, Q::zero(), p.t_loop);
        let o = swap_protocol(&mut st, 1, 2, "SWAP", &p, &SwapOptions { physical: true, resync: qi(50) }).unwrap();
        assert!(o.labels_exchanged);
        assert_eq!(o.total, o.shuttle_laps * p.t_loop + qi(50));
        assert_eq!(st.cyclic_order_from(0), vec![0, 2, 1, 3]);
    }

    #[test]
    fn port_must_be_empty() {
        let p = TimingParams::silicon();
        let mut st = LoopState::evenly_spaced(3, Q::zero(), p.t_loop);
        let mut sc = TimedSchedule::default();
        st.enter(0, &mut sc).unwrap();
        assert_eq!(swap_protocol(&mut st, 1, 2, "CX", &p, &SwapOptions::default()).unwrap_err(), Error::PortOccupied);
    }

    #[test]
    fn stack_cost_matches_simulation() {
        let p = TimingParams::silicon();
        for off in 0..16 {
            let o = q(off, 64);
            for (i, j) in [(0, 7), (3, 1), (2, 5)] {
                let c = cnot_stack_cost(16, o, i, j).unwrap();
                let s = cnot_stack(16, o, i, j, &p).unwrap();
                assert_eq!(s.shuttle_laps, c);
            }
        }
        assert!(cnot_stack_cost(2, Q::zero(), 0, 1).is_err());
    }
}
