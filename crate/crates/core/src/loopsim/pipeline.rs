//! Measurement-device contention across rounds for n qubits sharing one loop.
//!
//! Every qubit alternates a compute phase of T_cyc(2) − T_meas with one measurement
//! on any of the m devices. Qubits reach the port in loop order, so measurements
//! start in (round, token) order; a job never starts before its predecessor.

use super::TimingParams;
use crate::error::{Error, Result};
use crate::rational::{q, Q};
use num_traits::Zero;
use serde::Serialize;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub meas_devices: u32,
    #[serde(serialize_with = "super::ser_q")]
    pub compute: Q,
    /// Mean over qubits of the time round r (index r-1) ends.
    #[serde(serialize_with = "ser_vec")]
    pub completions: Vec<Q>,
    /// Time at which the last qubit finishes round r.
    #[serde(serialize_with = "ser_vec")]
    pub last: Vec<Q>,
    /// Running-average cycle time per qubit: completions[r] / (r + 1).
    #[serde(serialize_with = "ser_vec")]
    pub averages: Vec<Q>,
    /// completions[r] - completions[r-1], with completions[-1] = 0.
    #[serde(serialize_with = "ser_vec")]
    pub increments: Vec<Q>,
    /// max(T_cyc(2), (n/m)·T_meas).
    #[serde(serialize_with = "super::ser_q")]
    pub steady_state: Q,
}

fn ser_vec<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&crate::rational::fmt_q(x))?;
    }
    seq.end()
}

/// Single-patch round time: 27/8·T_loop + 2·T_1q + 4·T_2q + T_meas.
pub fn t_cyc2(params: &TimingParams) -> Q {
    q(27, 8) * params.t_loop + params.t_1q * 2 + params.t_2q * 4 + params.t_meas
}

pub fn pipeline_model(n: usize, params: &TimingParams, rounds: usize) -> Result<PipelineReport> {
    params.validate()?;
    if n < 2 || rounds == 0 {
        return Err(Error::Precondition(format!("need n >= 2 and rounds >= 1, got n = {n}, rounds = {rounds}")));
    }
    let m = params.meas_devices as usize;
    let compute = t_cyc2(params) - params.t_meas;
    let mut arrival = vec![compute; n];
    let mut free: BinaryHeap<Reverse<(Q, usize)>> = (0..m).map(|d| Reverse((Q::zero(), d))).collect();
    let mut completions = Vec::with_capacity(rounds);
    let mut last = Vec::with_capacity(rounds);
    let mut prev_start = Q::zero();
    let nq = Q::from_integer(n as i64);
    for _ in 0..rounds {
        let mut sum = Q::zero();
        let mut latest = Q::zero();
        for a in arrival.iter_mut() {
            let Reverse((avail, dev)) = free.pop().expect("m >= 1");
            let start = (*a).max(avail).max(prev_start);
            let done = start + params.t_meas;
            free.push(Reverse((done, dev)));
            prev_start = start;
            sum += done;
            latest = latest.max(done);
            *a = done + compute;
        }
        completions.push(sum / nq);
        last.push(latest);
    }
    let averages = completions.iter().enumerate().map(|(r, c)| *c / Q::from_integer(r as i64 + 1)).collect();
    let increments = completions.iter().enumerate().map(|(r, c)| if r == 0 { *c } else { *c - completions[r - 1] }).collect();
    let steady_state = t_cyc2(params).max(Q::from_integer(n as i64) / Q::from_integer(m as i64) * params.t_meas);
    Ok(PipelineReport { n, meas_devices: params.meas_devices, compute, completions, last, averages, increments, steady_state })
}
