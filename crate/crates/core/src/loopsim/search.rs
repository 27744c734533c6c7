//! Exhaustive worst-case oracle over evenly spaced starts on a position lattice.
//!
//! Tokens sit at o + i/n. Offsets o range over the lattice points in [0, 1/n); any
//! other offset is a relabelling, except for a stack where layers are structural. Swap and stack CNOT enumerate every pair; the
//! rearrangement enumerates every target order through a subset DP over visiting
//! sequences, which is exact because the cost is a sum of pairwise arcs.

use super::rearrange::{nearest_token, ParkSide};
use super::swap::{cnot_stack_cost, swap_cost};
use super::TimingParams;
use crate::error::{Error, Result};
use crate::parallel::{max_over, Exec};
use crate::rational::{q, Q};
use num_integer::Integer;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Swap,
    Rearrange(ParkSide),
    CnotStack,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Swap => "swap",
            Protocol::Rearrange(_) => "rearrange",
            Protocol::CnotStack => "cnot_stack",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "super::ser_q")]
    pub offset: Q,
    pub pair: Option<(usize, usize)>,
    pub target: Option<Vec<usize>>,
    pub mirrored: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub protocol: Protocol,
    pub n: usize,
    #[serde(serialize_with = "super::ser_q")]
    pub granularity: Q,
    /// Worst shuttling in laps.
    #[serde(serialize_with = "super::ser_q")]
    pub laps: Q,
    /// Worst makespan in ns, gates included.
    #[serde(serialize_with = "super::ser_q")]
    pub makespan: Q,
    pub offsets: usize,
    pub witness: Witness,
}

pub fn worst_case_search(protocol: Protocol, n: usize, granularity: Q, params: &TimingParams) -> Result<SearchResult> {
    worst_case_search_with(Exec::default(), protocol, n, granularity, params)
}

pub fn worst_case_search_with(
    exec: Exec,
    protocol: Protocol,
    n: usize,
    granularity: Q,
    params: &TimingParams,
) -> Result<SearchResult> {
    params.validate()?;
    if n < 2 {
        return Err(Error::Precondition(format!("need at least two tokens, got {n}")));
    }
    if granularity <= Q::from_integer(0) || *granularity.numer() != 1 || *granularity.denom() < 4 * n as i64 {
        return Err(Error::Precondition(format!("granularity must be 1/k with k >= 4n, got {granularity}")));
    }
    if protocol == Protocol::CnotStack {
        cnot_stack_cost(n, Q::from_integer(0), 0, 1)?;
    }
    // Lattice of N points per lap; slots are N/n apart.
    let big_n = granularity.denom().lcm(&(n as i64));
    let step = big_n / *granularity.denom();
    // A stack fixes which slots hold which layer, so its offsets span the whole lap.
    let span = if protocol == Protocol::CnotStack { big_n } else { big_n / n as i64 };
    let offsets = (span / step) as usize;
    let best = max_over(exec, offsets, |k| {
        let o = k as i64 * step;
        let (laps, w) = match protocol {
            Protocol::Swap => worst_pair(n, |a, b| Ok(swap_cost(pos(o, a, n, big_n), pos(o, b, n, big_n))))?,
            Protocol::CnotStack => {
                let off = q(o, big_n);
                worst_pair(n / 2, |i, j| cnot_stack_cost(n, off, i, j))?
            }
            Protocol::Rearrange(side) => {
                let (units, target, mirrored) = rearrange_dp(n, o, big_n, side);
                (q(units, big_n), Witness { offset: Q::from_integer(0), pair: None, target: Some(target), mirrored })
            }
        };
        Some((laps, Witness { offset: q(o, big_n), ..w }))
    });
    let (laps, witness) = best.ok_or_else(|| Error::Precondition("empty search space".into()))?;
    let gates = match protocol {
        Protocol::Swap => params.t_2q,
        Protocol::CnotStack => params.t_2q * 2,
        Protocol::Rearrange(_) => Q::from_integer(0),
    };
    Ok(SearchResult { protocol, n, granularity, laps, makespan: laps * params.t_loop + gates, offsets, witness })
}

fn pos(o: i64, i: usize, n: usize, big_n: i64) -> Q {
    q(o + i as i64 * (big_n / n as i64), big_n)
}

fn worst_pair(k: usize, cost: impl Fn(usize, usize) -> Result<Q>) -> Option<(Q, Witness)> {
    let mut best: Option<(Q, (usize, usize))> = None;
    for a in 0..k {
        for b in a + 1..k {
            let c = cost(a, b).ok()?;
            if best.is_none_or(|(x, _)| c > x) {
                best = Some((c, (a, b)));
            }
        }
    }
    best.map(|(c, p)| (c, Witness { offset: Q::from_integer(0), pair: Some(p), target: None, mirrored: false }))
}

fn circ_units(x: i64, big_n: i64) -> i64 {
    let r = x.rem_euclid(big_n);
    r.min(big_n - r)
}

/// Worst rearrangement from offset `o` (lattice units), as (units, target, mirrored).
/// Visiting orders start at the token nearest the junction; the last token parks.
fn rearrange_dp(n: usize, o: i64, big_n: i64, side: ParkSide) -> (i64, Vec<usize>, bool) {
    let slot = big_n / n as i64;
    let p: Vec<i64> = (0..n).map(|i| o + i as i64 * slot).collect();
    if n < 3 {
        return (0, (0..n).collect(), false);
    }
    let qpos: Vec<Q> = p.iter().map(|&x| q(x, big_n)).collect();
    let f = nearest_token(&qpos);
    let full = (1usize << n) - 1;
    const NONE: i64 = i64::MIN;
    let mut dp = vec![NONE; (1 << n) * n];
    let mut parent = vec![u8::MAX; (1 << n) * n];
    dp[(1 << f) * n + f] = 0;
    for mask in 0..=full {
        if mask & (1 << f) == 0 || mask.count_ones() as usize >= n - 1 {
            continue;
        }
        for last in 0..n {
            let v = dp[mask * n + last];
            if v == NONE {
                continue;
            }
            for nx in 0..n {
                if mask & (1 << nx) != 0 {
                    continue;
                }
                let m2 = mask | (1 << nx);
                let c = v + circ_units(p[nx] - p[last], big_n);
                if c > dp[m2 * n + nx] {
                    dp[m2 * n + nx] = c;
                    parent[m2 * n + nx] = last as u8;
                }
            }
        }
    }
    let identity: Vec<usize> = (0..n).map(|i| (f + i) % n).collect();
    let mut best: Option<(i64, usize, usize, bool)> = None;
    for l in 0..n {
        if l == f {
            continue;
        }
        let mask = full & !(1 << l);
        for last in 0..n {
            let v = dp[mask * n + last];
            if v == NONE {
                continue;
            }
            let plus = circ_units(p[l] - p[last] - slot, big_n);
            let minus = circ_units(p[l] - p[last] + slot, big_n);
            let (park, mir) = match side {
                ParkSide::Nearest if minus < plus => (minus, true),
                _ => (plus, false),
            };
            let total = v + park;
            if best.is_none_or(|b| total > b.0) {
                best = Some((total, l, last, mir));
            }
        }
    }
    let (v, l, mut last, mirrored) = best.expect("n >= 3");
    let mut seq = vec![l];
    let mut mask = full & !(1 << l);
    while last != f {
        seq.push(last);
        let prev = parent[mask * n + last] as usize;
        mask &= !(1 << last);
        last = prev;
    }
    seq.push(f);
    seq.reverse();
    debug_assert_ne!(seq, identity, "identity order cannot be the worst case");
    let units = circ_units(p[f], big_n) + v + (n as i64 - 2) * slot;
    (units, seq, mirrored)
}
