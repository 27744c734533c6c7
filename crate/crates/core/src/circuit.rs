//! Time-stamped circuits shared by the tableau and dense engines.

use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::tableau::{MeasureResult, StabilizerState};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    CX,
    CZ,
    Swap,
    T,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::CX | Gate::CZ | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "SDG",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::CX => "CX",
            Gate::CZ => "CZ",
            Gate::Swap => "SWAP",
            Gate::T => "T",
        }
    }

    pub fn is_clifford(self) -> bool {
        self != Gate::T
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Gate { gate: Gate, qubits: Vec<usize> },
    /// Prepare |0>.
    Reset { qubit: usize },
    Measure { basis: Basis, qubit: usize, record: usize },
    /// Applied when every listed record equals the listed bit.
    Cond { when: Vec<(usize, bool)>, gate: Gate, qubits: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedOp {
    pub time: u32,
    pub op: Op,
}

/// Ops in time order; `time` is a layer index, not wall-clock.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledCircuit {
    pub num_qubits: usize,
    pub ops: Vec<TimedOp>,
    pub num_records: usize,
    /// Records expected to be deterministic on codespace inputs.
    pub checks: Vec<usize>,
}

impl ScheduledCircuit {
    pub fn new(num_qubits: usize) -> Self {
        ScheduledCircuit { num_qubits, ..Default::default() }
    }

    pub fn gate(&mut self, time: u32, gate: Gate, qubits: &[usize]) {
        self.ops.push(TimedOp { time, op: Op::Gate { gate, qubits: qubits.to_vec() } });
    }

    pub fn reset(&mut self, time: u32, qubit: usize) {
        self.ops.push(TimedOp { time, op: Op::Reset { qubit } });
    }

    pub fn measure(&mut self, time: u32, basis: Basis, qubit: usize) -> usize {
        let record = self.num_records;
        self.num_records += 1;
        self.ops.push(TimedOp { time, op: Op::Measure { basis, qubit, record } });
        record
    }

    pub fn cond(&mut self, time: u32, when: &[(usize, bool)], gate: Gate, qubits: &[usize]) {
        self.ops.push(TimedOp { time, op: Op::Cond { when: when.to_vec(), gate, qubits: qubits.to_vec() } });
    }

    /// Append `other` after this circuit, shifting its times and records.
    pub fn extend(&mut self, other: &ScheduledCircuit) {
        let t0 = self.ops.iter().map(|o| o.time + 1).max().unwrap_or(0);
        let r0 = self.num_records;
        self.num_qubits = self.num_qubits.max(other.num_qubits);
        for o in &other.ops {
            let op = match &o.op {
                Op::Measure { basis, qubit, record } => Op::Measure { basis: *basis, qubit: *qubit, record: record + r0 },
                Op::Cond { when, gate, qubits } => Op::Cond {
                    when: when.iter().map(|&(r, b)| (r + r0, b)).collect(),
                    gate: *gate,
                    qubits: qubits.clone(),
                },
                op => op.clone(),
            };
            self.ops.push(TimedOp { time: o.time + t0, op });
        }
        self.num_records += other.num_records;
        self.checks.extend(other.checks.iter().map(|r| r + r0));
    }

    pub fn depth(&self) -> u32 {
        self.ops.iter().map(|o| o.time + 1).max().unwrap_or(0)
    }

    pub fn count_gate(&self, g: Gate) -> usize {
        self.ops
            .iter()
            .filter(|o| matches!(&o.op, Op::Gate { gate, .. } | Op::Cond { gate, .. } if *gate == g))
            .count()
    }

    /// Ops at `time` touch disjoint qubits.
    pub fn layers_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for o in &self.ops {
            let qs: Vec<usize> = match &o.op {
                Op::Gate { qubits, .. } | Op::Cond { qubits, .. } => qubits.clone(),
                Op::Reset { qubit } | Op::Measure { qubit, .. } => vec![*qubit],
            };
            for q in qs {
                if !seen.insert((o.time, q)) {
                    return false;
                }
            }
        }
        true
    }

    /// One line per op: time, name, targets.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for o in &self.ops {
            let _ = match &o.op {
                Op::Gate { gate, qubits } => writeln!(s, "{}\t{}\t{}", o.time, gate.name(), join(qubits)),
                Op::Reset { qubit } => writeln!(s, "{}\tR\t{}", o.time, qubit),
                Op::Measure { basis, qubit, record } => {
                    writeln!(s, "{}\tM{:?}\t{}\tm{}", o.time, basis, qubit, record)
                }
                Op::Cond { when, gate, qubits } => {
                    let c: Vec<String> = when.iter().map(|(r, b)| format!("m{}={}", r, *b as u8)).collect();
                    writeln!(s, "{}\t{}\t{}\tif {}", o.time, gate.name(), join(qubits), c.join("&"))
                }
            };
        }
        s
    }
}

fn join(qs: &[usize]) -> String {
    qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

/// Common surface of the two simulation engines.
pub trait Engine {
    fn apply(&mut self, gate: Gate, qubits: &[usize]) -> Result<()>;
    fn measure_q<R: Rng>(&mut self, basis: Basis, qubit: usize, forced: Option<bool>, rng: &mut R) -> Result<MeasureResult>;
    fn reset_q<R: Rng>(&mut self, qubit: usize, rng: &mut R) -> Result<()>;
}

impl Engine for StabilizerState {
    fn apply(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        StabilizerState::apply(self, gate, qubits)
    }
    fn measure_q<R: Rng>(&mut self, basis: Basis, qubit: usize, forced: Option<bool>, rng: &mut R) -> Result<MeasureResult> {
        self.measure(basis, qubit, forced, rng)
    }
    fn reset_q<R: Rng>(&mut self, qubit: usize, rng: &mut R) -> Result<()> {
        self.reset(qubit, rng)
    }
}

impl Engine for DenseState {
    fn apply(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        DenseState::apply(self, gate, qubits)
    }
    fn measure_q<R: Rng>(&mut self, basis: Basis, qubit: usize, forced: Option<bool>, rng: &mut R) -> Result<MeasureResult> {
        self.measure(basis, qubit, forced, rng)
    }
    fn reset_q<R: Rng>(&mut self, qubit: usize, rng: &mut R) -> Result<()> {
        self.reset(qubit, rng)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub outcomes: Vec<bool>,
    pub deterministic: Vec<bool>,
}

/// Execute with optional per-record forced outcomes (used for branch enumeration).
pub fn run<E: Engine, R: Rng>(
    engine: &mut E,
    c: &ScheduledCircuit,
    forced: &[Option<bool>],
    rng: &mut R,
) -> Result<RunRecord> {
    let mut outcomes = vec![false; c.num_records];
    let mut deterministic = vec![false; c.num_records];
    let mut done = vec![false; c.num_records];
    for o in &c.ops {
        match &o.op {
            Op::Gate { gate, qubits } => engine.apply(*gate, qubits)?,
            Op::Reset { qubit } => engine.reset_q(*qubit, rng)?,
            Op::Measure { basis, qubit, record } => {
                let f = forced.get(*record).copied().flatten();
                let r = engine.measure_q(*basis, *qubit, f, rng)?;
                outcomes[*record] = r.outcome;
                deterministic[*record] = r.deterministic;
                done[*record] = true;
            }
            Op::Cond { when, gate, qubits } => {
                if when.iter().any(|(r, _)| !done[*r]) {
                    return Err(Error::Precondition("condition references a later record".into()));
                }
                if when.iter().all(|&(r, b)| outcomes[r] == b) {
                    engine.apply(*gate, qubits)?;
                }
            }
        }
    }
    Ok(RunRecord { outcomes, deterministic })
}
