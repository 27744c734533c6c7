//! Reordering all tokens of a loop through the LIFO port.
//!
//! The token nearest the junction enters first, the rest follow in target order,
//! the last token parks one slot from the junction, and the port unwinds with a
//! 1/n rotation between exits.

use super::{LoopState, TimedSchedule, TimingParams};
use crate::error::{Error, Result};
use crate::rational::{circ, q, Q};
use num_traits::Zero;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParkSide {
    /// Park on the nearer side; the far side unwinds into the mirrored cyclic order.
    #[default]
    Nearest,
    /// Always park at +1/n so the unwound order equals the target.
    PreserveOrientation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RearrangeOutcome {
    pub schedule: TimedSchedule,
    #[serde(serialize_with = "super::ser_q")]
    pub laps: Q,
    #[serde(serialize_with = "super::ser_q")]
    pub total: Q,
    pub first: Option<usize>,
    /// Final cyclic order is the reverse of the target.
    pub mirrored: bool,
    pub final_order: Vec<usize>,
}

fn validate(n: usize, target: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if target.len() != n {
        return Err(Error::NotPermutation);
    }
    for &t in target {
        if t >= n || seen[t] {
            return Err(Error::NotPermutation);
        }
        seen[t] = true;
    }
    Ok(())
}

fn is_rotation_of(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    match b.iter().position(|&x| x == a[0]) {
        Some(k) => (0..a.len()).all(|i| a[i] == b[(k + i) % b.len()]),
        None => false,
    }
}

/// Token nearest the junction, lowest id on ties.
pub fn nearest_token(pos: &[Q]) -> usize {
    (0..pos.len()).min_by_key(|&t| (circ(pos[t]), t)).expect("non-empty")
}

/// Closed-form laps for tokens at `pos` (token i at pos[i]) and a cyclic target order.
pub fn rearrange_cost(pos: &[Q], target: &[usize], side: ParkSide) -> Result<(Q, bool)> {
    let n = pos.len();
    validate(n, target)?;
    let mut by_pos: Vec<usize> = (0..n).collect();
    by_pos.sort_by_key(|&t| crate::rational::frac(pos[t]));
    if n < 3 || is_rotation_of(target, &by_pos) {
        return Ok((Q::zero(), false));
    }
    let f = nearest_token(pos);
    let k = target.iter().position(|&t| t == f).expect("validated");
    let seq: Vec<usize> = (0..n).map(|i| target[(k + i) % n]).collect();
    let mut laps = circ(pos[f]);
    let mut cur = pos[f];
    for &t in &seq[1..n - 1] {
        laps += circ(pos[t] - cur);
        cur = pos[t];
    }
    let l = seq[n - 1];
    let slot = q(1, n as i64);
    let plus = circ(pos[l] - cur - slot);
    let minus = circ(pos[l] - cur + slot);
    let (park, mirrored) = match side {
        ParkSide::PreserveOrientation => (plus, false),
        ParkSide::Nearest if minus < plus => (minus, true),
        ParkSide::Nearest => (plus, false),
    };
    Ok((laps + park + q(n as i64 - 2, n as i64), mirrored))
}

/// Event-level reordering. `target` lists token ids in the desired increasing-position cyclic order.
pub fn rearrange(st: &mut LoopState, target: &[usize], params: &TimingParams, side: ParkSide) -> Result<RearrangeOutcome> {
    let _ = params;
    let n = st.num_tokens();
    validate(n, target)?;
    if !st.port().is_empty() {
        return Err(Error::PortOccupied);
    }
    let mut sched = TimedSchedule { events: Vec::new(), makespan: st.clock };
    let t0 = st.clock;
    let order = st.ring_order();
    if n < 3 || is_rotation_of(target, &order) {
        return Ok(RearrangeOutcome { schedule: sched, laps: Q::zero(), total: Q::zero(), first: None, mirrored: false, final_order: order });
    }
    let pos: Vec<Q> = (0..n).map(|t| st.position(t)).collect::<Result<_>>()?;
    let f = nearest_token(&pos);
    let k = target.iter().position(|&t| t == f).expect("validated");
    let seq: Vec<usize> = (0..n).map(|i| target[(k + i) % n]).collect();
    let mut laps = Q::zero();
    for &t in &seq[..n - 1] {
        laps += circ(st.bring_to(t, Q::zero(), &mut sched)?);
        st.enter(t, &mut sched)?;
    }
    let l = seq[n - 1];
    let slot = q(1, n as i64);
    let pl = st.position(l)?;
    let plus = circ(pl - slot);
    let minus = circ(pl + slot);
    let sign = match side {
        ParkSide::Nearest if minus < plus => -1,
        _ => 1,
    };
    laps += circ(st.bring_to(l, slot * sign, &mut sched)?);
    for i in 0..n - 1 {
        st.exit(&mut sched)?;
        if i < n - 2 {
            st.rotate(slot * sign, &mut sched);
            laps += slot;
        }
    }
    let final_order = st.cyclic_order_from(f);
    let mirrored = sign < 0;
    let expect: Vec<usize> = if mirrored {
        std::iter::once(seq[0]).chain(seq[1..].iter().rev().copied()).collect()
    } else {
        seq.clone()
    };
    if final_order != expect {
        return Err(Error::Precondition("unwound order does not match the plan".into()));
    }
    Ok(RearrangeOutcome { total: st.clock - t0, schedule: sched, laps, first: Some(f), mirrored, final_order })
}

/// The reordering drawn for n = 8: 1..8 becomes 3 7 4 8 1 5 2 6 (zero-based here).
pub const EXAMPLE_TARGET: [usize; 8] = [2, 6, 3, 7, 0, 4, 1, 5];
