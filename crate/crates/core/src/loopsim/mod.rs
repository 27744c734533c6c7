//! Exact-rational simulation of shuttling loops.
//!
//! A loop is a ring of tokens with positions in [0, 1) as fractions of the loop
//! perimeter. The junction sits at 0. Rotating the ring moves every token that is not
//! parked in the port; entering and leaving the port at the junction is free. The
//! port is a LIFO stack whose top two tokens meet the gate device.

mod cycle;
mod pipeline;
mod rearrange;
mod search;
mod swap;

pub use crate::params::TimingParams;
pub use cycle::{cycle_plans, simulate_cycle, CornerPlan, CycleReport, PhaseTiming};
pub use pipeline::{pipeline_model, PipelineReport};
pub use rearrange::{rearrange, rearrange_cost, ParkSide, RearrangeOutcome, EXAMPLE_TARGET};
pub use search::{worst_case_search, worst_case_search_with, Protocol, SearchResult, Witness};
pub use swap::{cnot_stack, cnot_stack_cost, swap_cost, swap_protocol, SwapOptions, SwapOutcome};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, frac, q, shortest_arc, Q};
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Ring(#[serde(serialize_with = "ser_q")] Q),
    /// Depth from the bottom of the port stack.
    Port(usize),
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Action {
    /// Rigid rotation of all ring tokens by `delta` laps.
    Rotate {
        #[serde(serialize_with = "ser_q")]
        delta: Q,
    },
    Enter,
    Exit,
    Gate { name: String },
    Dwell { reason: String },
    Measure,
    SingleQubit { name: String },
}

impl Action {
    pub fn label(&self) -> String {
        match self {
            Action::Rotate { delta } => format!("rotate {}", fmt_q(delta)),
            Action::Enter => "enter".into(),
            Action::Exit => "exit".into(),
            Action::Gate { name } => format!("gate {name}"),
            Action::Dwell { reason } => format!("dwell {reason}"),
            Action::Measure => "measure".into(),
            Action::SingleQubit { name } => name.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    #[serde(serialize_with = "ser_q")]
    pub start: Q,
    #[serde(serialize_with = "ser_q")]
    pub duration: Q,
    pub action: Action,
    pub loop_id: usize,
    pub tokens: Vec<usize>,
}

impl Event {
    pub fn end(&self) -> Q {
        self.start + self.duration
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TimedSchedule {
    pub events: Vec<Event>,
    #[serde(serialize_with = "ser_q")]
    pub makespan: Q,
}

impl TimedSchedule {
    pub fn push(&mut self, e: Event) {
        if e.end() > self.makespan {
            self.makespan = e.end();
        }
        self.events.push(e);
    }

    /// Total duration of rotation events, in time units.
    pub fn shuttle_time(&self) -> Q {
        self.events.iter().filter(|e| matches!(e.action, Action::Rotate { .. })).map(|e| e.duration).sum()
    }

    /// No token takes part in two events whose open intervals overlap.
    pub fn tokens_disjoint(&self) -> bool {
        let mut by_token: BTreeMap<(usize, usize), Vec<(Q, Q)>> = BTreeMap::new();
        for e in &self.events {
            for &t in &e.tokens {
                by_token.entry((e.loop_id, t)).or_default().push((e.start, e.end()));
            }
        }
        by_token.values_mut().all(|iv| {
            iv.sort();
            iv.windows(2).all(|w| w[1].0 >= w[0].1 || w[0].0 == w[0].1 || w[1].0 == w[1].1)
        })
    }

    /// Columnar text: start, duration, action, loop, tokens. Times scaled by `unit` label.
    pub fn to_table(&self) -> String {
        let mut s = String::from("start\tduration\taction\tloop\ttokens\n");
        for e in &self.events {
            let toks: Vec<String> = e.tokens.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", fmt_q(&e.start), fmt_q(&e.duration), e.action.label(), e.loop_id, toks.join(","));
        }
        s
    }
}

/// Ring tokens, the LIFO port, and a clock. Times are in the same unit as `lap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopState {
    pub loop_id: usize,
    pub lap: Q,
    pub clock: Q,
    places: BTreeMap<usize, Place>,
    port: Vec<usize>,
}

impl LoopState {
    /// Tokens 0..n evenly spaced, token i at offset + i/n.
    pub fn evenly_spaced(n: usize, offset: Q, lap: Q) -> Self {
        let pos = (0..n).map(|i| frac(offset + q(i as i64, n as i64))).collect::<Vec<_>>();
        Self::from_positions(&pos, lap).expect("distinct by construction")
    }

    pub fn from_positions(pos: &[Q], lap: Q) -> Result<Self> {
        let mut places = BTreeMap::new();
        for (i, p) in pos.iter().enumerate() {
            let p = frac(*p);
            if places.values().any(|x| *x == Place::Ring(p)) {
                return Err(Error::Precondition(format!("two tokens at position {}", fmt_q(&p))));
            }
            places.insert(i, Place::Ring(p));
        }
        Ok(LoopState { loop_id: 0, lap, clock: Q::zero(), places, port: Vec::new() })
    }

    pub fn with_loop_id(mut self, id: usize) -> Self {
        self.loop_id = id;
        self
    }

    pub fn num_tokens(&self) -> usize {
        self.places.len()
    }

    pub fn place(&self, t: usize) -> Result<Place> {
        self.places.get(&t).copied().ok_or(Error::UnknownToken(t))
    }

    pub fn position(&self, t: usize) -> Result<Q> {
        match self.place(t)? {
            Place::Ring(p) => Ok(p),
            Place::Port(_) => Err(Error::Precondition(format!("token {t} is in the port"))),
        }
    }

    pub fn port(&self) -> &[usize] {
        &self.port
    }

    pub fn ring_tokens(&self) -> Vec<usize> {
        self.places.iter().filter(|(_, p)| matches!(p, Place::Ring(_))).map(|(t, _)| *t).collect()
    }

    /// Ring tokens in increasing position order starting from the junction.
    pub fn ring_order(&self) -> Vec<usize> {
        let mut v: Vec<(Q, usize)> =
            self.places.iter().filter_map(|(t, p)| if let Place::Ring(x) = p { Some((*x, *t)) } else { None }).collect();
        v.sort();
        v.into_iter().map(|(_, t)| t).collect()
    }

    fn occupied(&self, pos: Q) -> bool {
        self.places.values().any(|p| *p == Place::Ring(pos))
    }

    pub fn rotate(&mut self, delta: Q, sched: &mut TimedSchedule) {
        if delta.is_zero() {
            return;
        }
        let toks = self.ring_tokens();
        for t in &toks {
            if let Some(Place::Ring(p)) = self.places.get_mut(t) {
                *p = frac(*p + delta);
            }
        }
        let dur = delta.abs() * self.lap;
        sched.push(Event { start: self.clock, duration: dur, action: Action::Rotate { delta }, loop_id: self.loop_id, tokens: toks });
        self.clock += dur;
    }

    /// Shortest rotation bringing token `t` onto `target`.
    pub fn bring_to(&mut self, t: usize, target: Q, sched: &mut TimedSchedule) -> Result<Q> {
        let p = self.position(t)?;
        let d = shortest_arc(p, target);
        self.rotate(d, sched);
        Ok(d)
    }

    pub fn enter(&mut self, t: usize, sched: &mut TimedSchedule) -> Result<()> {
        if self.position(t)? != Q::zero() {
            return Err(Error::Precondition(format!("token {t} is not at the junction")));
        }
        self.places.insert(t, Place::Port(self.port.len()));
        self.port.push(t);
        sched.push(Event { start: self.clock, duration: Q::zero(), action: Action::Enter, loop_id: self.loop_id, tokens: vec![t] });
        Ok(())
    }

    pub fn exit(&mut self, sched: &mut TimedSchedule) -> Result<usize> {
        let t = *self.port.last().ok_or_else(|| Error::Precondition("port is empty".into()))?;
        if self.occupied(Q::zero()) {
            return Err(Error::Precondition("junction slot is occupied".into()));
        }
        self.port.pop();
        self.places.insert(t, Place::Ring(Q::zero()));
        sched.push(Event { start: self.clock, duration: Q::zero(), action: Action::Exit, loop_id: self.loop_id, tokens: vec![t] });
        Ok(t)
    }

    /// The top port token leaves onto the junction while the ring token there takes its place.
    pub fn trade(&mut self, sched: &mut TimedSchedule) -> Result<(usize, usize)> {
        let out = *self.port.last().ok_or_else(|| Error::Precondition("port is empty".into()))?;
        let inn = self
            .ring_tokens()
            .into_iter()
            .find(|t| self.places[t] == Place::Ring(Q::zero()))
            .ok_or_else(|| Error::Precondition("no token at the junction".into()))?;
        let depth = self.port.len() - 1;
        self.port[depth] = inn;
        self.places.insert(inn, Place::Port(depth));
        self.places.insert(out, Place::Ring(Q::zero()));
        sched.push(Event { start: self.clock, duration: Q::zero(), action: Action::Exit, loop_id: self.loop_id, tokens: vec![out] });
        sched.push(Event { start: self.clock, duration: Q::zero(), action: Action::Enter, loop_id: self.loop_id, tokens: vec![inn] });
        Ok((out, inn))
    }

    /// Hold for `dur` with `tokens` busy.
    pub fn hold(&mut self, action: Action, tokens: Vec<usize>, dur: Q, sched: &mut TimedSchedule) {
        sched.push(Event { start: self.clock, duration: dur, action, loop_id: self.loop_id, tokens });
        self.clock += dur;
    }

    /// Cyclic sequence of ring tokens read in increasing position, rotated to start at `first`.
    pub fn cyclic_order_from(&self, first: usize) -> Vec<usize> {
        let o = self.ring_order();
        match o.iter().position(|&t| t == first) {
            Some(k) => o[k..].iter().chain(&o[..k]).copied().collect(),
            None => o,
        }
    }
}
