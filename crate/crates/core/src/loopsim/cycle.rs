//! One stabilizer round of a single folded patch (two qubits per loop).
//!
//! Each representative loop carries a yellow token (0) and a blue token (1) and
//! rotates forward only. Corners A, B, C, D sit at 0, 1/4, 1/2, 3/4 of the lap;
//! the port junction lies between B and C. Phases end on a barrier across loops.

use super::{Action, LoopState, TimedSchedule, TimingParams};
use crate::error::{Error, Result};
use crate::rational::{frac, q, Q};
use crate::surface_codes::{LoopEmbedding, PatchKind};
use num_traits::Zero;
use serde::Serialize;

pub const A: (i64, i64) = (0, 1);
pub const B: (i64, i64) = (1, 4);
pub const C: (i64, i64) = (1, 2);
pub const D: (i64, i64) = (3, 4);
const JUNCTION: (i64, i64) = (3, 8);

fn at(c: (i64, i64)) -> Q {
    frac(q(c.0, c.1) - q(JUNCTION.0, JUNCTION.1))
}

/// Start corners and the corner of each of the four CNOT layers, per token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerPlan {
    pub name: String,
    pub start: [(i64, i64); 2],
    pub sites: [[(i64, i64); 4]; 2],
}

/// Loops I, II and III; between them they bound every phase of the round.
pub fn cycle_plans() -> Vec<CornerPlan> {
    vec![
        CornerPlan { name: "I".into(), start: [A, C], sites: [[A, D, D, B], [A, B, B, D]] },
        CornerPlan { name: "II".into(), start: [A, C], sites: [[C, B, B, D], [A, D, D, B]] },
        CornerPlan { name: "III".into(), start: [A, C], sites: [[A, B, D, C], [C, D, B, A]] },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseTiming {
    pub name: String,
    #[serde(serialize_with = "super::ser_q")]
    pub duration: Q,
    /// Shuttle laps of the limiting loop.
    #[serde(serialize_with = "super::ser_q")]
    pub laps: Q,
    pub limiting: String,
    pub per_loop: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleReport {
    pub schedule: TimedSchedule,
    pub phases: Vec<PhaseTiming>,
    #[serde(serialize_with = "super::ser_q")]
    pub makespan: Q,
    #[serde(serialize_with = "super::ser_q")]
    pub shuttle_laps: Q,
}

/// Greedy forward execution of two CNOT layers starting at `layer`.
fn run_layers(st: &mut LoopState, plan: &CornerPlan, layer: usize, params: &TimingParams, sched: &mut TimedSchedule) -> Result<Q> {
    let mut pending = [layer; 2];
    let end = layer + 2;
    let mut laps = Q::zero();
    while pending.iter().any(|&p| p < end) {
        let ready: Vec<usize> = (0..2)
            .filter(|&t| pending[t] < end && st.position(t).map(|x| x == at(plan.sites[t][pending[t]])).unwrap_or(false))
            .collect();
        if !ready.is_empty() {
            st.hold(Action::Gate { name: "CX".into() }, ready.clone(), params.t_2q, sched);
            for t in ready {
                pending[t] += 1;
            }
            continue;
        }
        let step = (0..2)
            .filter(|&t| pending[t] < end)
            .map(|t| st.position(t).map(|x| frac(at(plan.sites[t][pending[t]]) - x)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .expect("some token pending");
        st.rotate(step, sched);
        laps += step;
    }
    Ok(laps)
}

/// Forward rotation until both tokens have entered the port; nearer token first.
fn enter_port(st: &mut LoopState, sched: &mut TimedSchedule) -> Result<Q> {
    let mut laps = Q::zero();
    while !st.ring_tokens().is_empty() {
        let toks = st.ring_tokens();
        let (t, d) = toks
            .iter()
            .map(|&t| st.position(t).map(|x| (t, frac(-x))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min_by_key(|&(t, d)| (d, t))
            .expect("ring non-empty");
        st.rotate(d, sched);
        laps += d;
        st.enter(t, sched)?;
    }
    Ok(laps)
}

/// Trace the round for the given loop plans.
pub fn simulate_plans(plans: &[CornerPlan], params: &TimingParams) -> Result<CycleReport> {
    params.validate()?;
    let mut states: Vec<LoopState> = plans
        .iter()
        .enumerate()
        .map(|(i, p)| LoopState::from_positions(&[at(p.start[0]), at(p.start[1])], params.t_loop).map(|s| s.with_loop_id(i)))
        .collect::<Result<_>>()?;
    let mut sched = TimedSchedule::default();
    let mut phases = Vec::new();
    let mut clock = Q::zero();
    let meas = Q::from_integer((2 + params.meas_devices as i64 - 1) / params.meas_devices as i64) * params.t_meas;
    let names = ["H", "CNOT layers 1-2", "CNOT layers 3-4", "H", "port entry", "measure"];
    for (k, name) in names.iter().enumerate() {
        let mut results = Vec::new();
        for (st, plan) in states.iter_mut().zip(plans) {
            st.clock = clock;
            let laps = match k {
                0 | 3 => {
                    st.hold(Action::SingleQubit { name: "H".into() }, vec![0, 1], params.t_1q, &mut sched);
                    Q::zero()
                }
                1 => run_layers(st, plan, 0, params, &mut sched)?,
                2 => run_layers(st, plan, 2, params, &mut sched)?,
                4 => enter_port(st, &mut sched)?,
                _ => {
                    st.hold(Action::Measure, vec![0, 1], meas, &mut sched);
                    Q::zero()
                }
            };
            results.push((st.clock - clock, laps, plan.name.clone()));
        }
        let (dur, laps, limiting) = results
            .iter()
            .max_by(|a, b| a.0.cmp(&b.0).then(b.2.cmp(&a.2)))
            .cloned()
            .expect("at least one loop");
        let per_loop = results.iter().map(|r| format!("{}: {}", r.2, crate::rational::fmt_q(&r.0))).collect();
        phases.push(PhaseTiming { name: name.to_string(), duration: dur, laps, limiting, per_loop });
        clock += dur;
    }
    sched.makespan = clock;
    let shuttle_laps = phases.iter().map(|p| p.laps).sum();
    Ok(CycleReport { schedule: sched, phases, makespan: clock, shuttle_laps })
}

/// One stabilizer round of a single folded patch embedding.
pub fn simulate_cycle(emb: &LoopEmbedding, params: &TimingParams) -> Result<CycleReport> {
    if emb.kind != PatchKind::Folded || emb.num_patches != 1 {
        return Err(Error::Unsupported(format!(
            "cycle tracing needs one folded patch (n = 2); got {} {:?} patches",
            emb.num_patches, emb.kind
        )));
    }
    simulate_plans(&cycle_plans(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;
    use crate::surface_codes::{build_patch, embed_stack};

    fn folded(n: usize) -> LoopEmbedding {
        let p = build_patch(3, PatchKind::Folded).unwrap();
        embed_stack(&vec![p; n], &TimingParams::silicon()).unwrap()
    }

    #[test]
    fn silicon_round_is_3150() {
        let r = simulate_cycle(&folded(1), &TimingParams::silicon()).unwrap();
        assert_eq!(r.makespan, qi(3150));
        assert_eq!(r.shuttle_laps, q(27, 8));
        assert!(r.schedule.tokens_disjoint());
    }

    #[test]
    fn phase_breakdown() {
        let r = simulate_plans(&cycle_plans(), &TimingParams::silicon()).unwrap();
        let p = &r.phases;
        assert_eq!((p[1].laps, p[1].limiting.as_str()), (q(5, 4), "II"));
        assert_eq!((p[2].laps, p[2].limiting.as_str()), (q(5, 4), "III"));
        assert_eq!((p[4].laps, p[4].limiting.as_str()), (q(7, 8), "III"));
    }

    #[test]
    fn shuttle_only_limit_and_linearity() {
        let mut p = TimingParams::shuttle_only(qi(400));
        p.t_meas = Q::zero();
        let a = simulate_cycle(&folded(1), &p).unwrap().makespan;
        assert_eq!(a, q(27, 8) * qi(400));
        let s = TimingParams::silicon();
        let mut s2 = s.clone();
        s2.t_loop *= 2;
        let base = simulate_cycle(&folded(1), &s).unwrap().makespan;
        let doubled = simulate_cycle(&folded(1), &s2).unwrap().makespan;
        assert_eq!(doubled - base, q(27, 8) * s.t_loop);
    }

    #[test]
    fn larger_stacks_rejected() {
        assert!(matches!(simulate_cycle(&folded(2), &TimingParams::silicon()), Err(Error::Unsupported(_))));
    }
}
