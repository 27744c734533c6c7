//! The two 8T-to-CCZ factory circuits: logical verification and runtime accounting.

use crate::circuit::{Basis, Gate, Op, ScheduledCircuit};
use crate::costs::{effective_cycle_time, gate_time, Arch, GateKind};
use crate::dense::{self, DenseState};
use num_complex::Complex64 as C;
use crate::error::{Error, Result};
use crate::expr::{Expr, Sym};
use crate::parallel::{map_range, Exec};
use crate::params::TimingParams;
use crate::rational::{fmt_q, q, qi, round_to, Q};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactoryVariant {
    /// Transversal S available; 8 logical qubits on a 16-qubit loop.
    Folded,
    /// S through Y-measurement teleportation; 12 logical qubits on a 12-qubit loop.
    Rotated,
}

impl FactoryVariant {
    pub fn name(&self) -> &'static str {
        match self {
            FactoryVariant::Folded => "folded",
            FactoryVariant::Rotated => "rotated",
        }
    }

    /// Qubits per loop when the factory fills one stack.
    pub fn loop_occupancy(&self) -> usize {
        match self {
            FactoryVariant::Folded => 16,
            FactoryVariant::Rotated => 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    T,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slice {
    /// 1-based; op times in the circuit equal this index.
    pub index: u32,
    /// A stabilizer round closes the slice.
    pub stabilizer_round: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactoryCircuit {
    pub variant: FactoryVariant,
    pub logical_qubits: usize,
    pub inputs: Vec<Input>,
    pub slices: Vec<Slice>,
    #[serde(skip)]
    pub circuit: ScheduledCircuit,
    /// Output qubits carrying |CCZ>.
    pub outputs: [usize; 3],
    /// Qubit post-selected on <+|.
    pub postselect: usize,
}

impl FactoryCircuit {
    pub fn count(&self, g: Gate) -> usize {
        self.circuit.count_gate(g)
    }

    pub fn count_measurements(&self, basis: Basis) -> usize {
        self.circuit.ops.iter().filter(|o| matches!(o.op, Op::Measure { basis: b, .. } if b == basis)).count()
    }

    /// Conditioned operations of gate `g`.
    pub fn count_conditioned(&self, g: Gate) -> usize {
        self.circuit.ops.iter().filter(|o| matches!(&o.op, Op::Cond { gate, .. } if *gate == g)).count()
    }

    pub fn ops_in_slice(&self, index: u32) -> Vec<&Op> {
        self.circuit.ops.iter().filter(|o| o.time == index).map(|o| &o.op).collect()
    }

    pub fn stabilizer_rounds(&self) -> usize {
        self.slices.iter().filter(|s| s.stabilizer_round).count()
    }
}

fn distill_core(c: &mut ScheduledCircuit) {
    for (t, pairs) in [(1, [(1, 0), (2, 3)]), (2, [(0, 2), (3, 1)]), (3, [(1, 0), (2, 3)])] {
        for (ctl, tgt) in pairs {
            c.gate(t, Gate::CX, &[ctl, tgt]);
        }
    }
    for i in 0..4 {
        c.gate(4, Gate::CX, &[i, i + 4]);
    }
}

fn distill_tail(c: &mut ScheduledCircuit, first: u32) {
    c.gate(first, Gate::CX, &[1, 0]);
    c.gate(first, Gate::CX, &[3, 2]);
    c.gate(first + 1, Gate::CX, &[3, 1]);
    for qb in 0..3 {
        c.gate(first + 2, Gate::X, &[qb]);
    }
}

pub fn ccz_factory_spec(variant: FactoryVariant) -> FactoryCircuit {
    match variant {
        FactoryVariant::Folded => {
            let mut c = ScheduledCircuit::new(8);
            distill_core(&mut c);
            for i in 0..4 {
                let r = c.measure(5, Basis::Z, i + 4);
                c.cond(5, &[(r, true)], Gate::S, &[i]);
            }
            distill_tail(&mut c, 6);
            let mut slices: Vec<Slice> = (1..=7).map(|index| Slice { index, stabilizer_round: true }).collect();
            slices.push(Slice { index: 8, stabilizer_round: false });
            FactoryCircuit {
                variant,
                logical_qubits: 8,
                inputs: vec![Input::T; 8],
                slices,
                circuit: c,
                outputs: [0, 1, 2],
                postselect: 3,
            }
        }
        FactoryVariant::Rotated => {
            let mut c = ScheduledCircuit::new(12);
            distill_core(&mut c);
            let mut zrec = [0; 4];
            for i in 0..4 {
                zrec[i] = c.measure(5, Basis::Z, i + 4);
                c.cond(5, &[(zrec[i], true)], Gate::CX, &[i, i + 8]);
            }
            for i in 0..4 {
                let y = c.measure(6, Basis::Y, i + 8);
                c.cond(6, &[(zrec[i], true), (y, false)], Gate::Z, &[i]);
            }
            distill_tail(&mut c, 7);
            let mut slices: Vec<Slice> = (1..=8).map(|index| Slice { index, stabilizer_round: true }).collect();
            slices.push(Slice { index: 9, stabilizer_round: false });
            let mut inputs = vec![Input::T; 8];
            inputs.extend([Input::Zero; 4]);
            FactoryCircuit { variant, logical_qubits: 12, inputs, slices, circuit: c, outputs: [0, 1, 2], postselect: 3 }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchResult {
    pub record: Vec<u8>,
    /// Probability of this measurement record.
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactoryVerification {
    pub variant: FactoryVariant,
    pub branches: usize,
    pub reachable: usize,
    pub min_fidelity: f64,
    pub worst_record: Vec<u8>,
    /// Probability that the post-selected qubit reads +.
    pub acceptance: f64,
}

/// CCZ|+++> on three qubits.
pub fn ccz_state() -> DenseState {
    let a = 1.0 / 8f64.sqrt();
    let amps = (0..8).map(|k| C::new(if k == 7 { -a } else { a }, 0.0)).collect();
    DenseState::from_amplitudes(amps).expect("normalised")
}

pub const FIDELITY_TOLERANCE: f64 = 1e-9;

pub fn verify_factory(circ: &FactoryCircuit) -> Result<FactoryVerification> {
    verify_factory_with(Exec::default(), circ, dense::ket_t())
}

/// Enumerate every measurement record with `t_input` on the T-input qubits.
pub fn verify_factory_with(exec: Exec, circ: &FactoryCircuit, t_input: [C; 2]) -> Result<FactoryVerification> {
    let n = circ.logical_qubits;
    if n > 12 {
        return Err(Error::Precondition(format!("dense verification supports at most 12 qubits, got {n}")));
    }
    let records = circ.circuit.num_records;
    let kets: Vec<[C; 2]> = circ.inputs.iter().map(|i| if *i == Input::T { t_input } else { dense::ket0() }).collect();
    let input = DenseState::product(&kets)?;
    let ideal = ccz_state();
    let results: Vec<Result<Option<BranchResult>>> = map_range(exec, 1 << records, |b| {
        let forced: Vec<Option<bool>> = (0..records).map(|r| Some(b >> r & 1 == 1)).collect();
        let mut st = input.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(b as u64);
        // Each forced projection renormalises, so the branch weight is the product of
        // the pre-projection probabilities.
        let mut prob = 1.0;
        let mut outcomes = vec![false; records];
        for o in &circ.circuit.ops {
            match &o.op {
                Op::Measure { basis, qubit, record } => {
                    let p = outcome_probability(&st, *basis, *qubit, forced[*record].unwrap_or(false))?;
                    if p < 1e-12 {
                        return Ok(None);
                    }
                    prob *= p;
                    let r = st.measure(*basis, *qubit, forced[*record], &mut rng)?;
                    outcomes[*record] = r.outcome;
                }
                Op::Gate { gate, qubits } => st.apply(*gate, qubits)?,
                Op::Cond { when, gate, qubits } => {
                    if when.iter().all(|&(r, v)| outcomes[r] == v) {
                        st.apply(*gate, qubits)?;
                    }
                }
                Op::Reset { qubit } => st.reset(*qubit, &mut rng)?,
            }
        }
        let (out, accept) = reduce_output(circ, &st, &outcomes)?;
        let fidelity = match out {
            Some(s) => s.fidelity(&ideal),
            None => 0.0,
        };
        let record = outcomes.iter().map(|&x| x as u8).collect();
        Ok(Some(BranchResult { record, probability: prob * accept, fidelity }))
    });
    let mut reachable = 0;
    let mut acceptance = 0.0;
    let mut worst: Option<BranchResult> = None;
    for r in results {
        if let Some(br) = r? {
            reachable += 1;
            acceptance += br.probability;
            if worst.as_ref().is_none_or(|w| br.fidelity < w.fidelity) {
                worst = Some(br);
            }
        }
    }
    let worst = worst.ok_or_else(|| Error::Precondition("no reachable branch".into()))?;
    if worst.fidelity < 1.0 - FIDELITY_TOLERANCE {
        return Err(Error::FactoryBranch { record: worst.record, fidelity: worst.fidelity });
    }
    Ok(FactoryVerification {
        variant: circ.variant,
        branches: 1 << records,
        reachable,
        min_fidelity: worst.fidelity,
        worst_record: worst.record,
        acceptance,
    })
}

fn outcome_probability(st: &DenseState, basis: Basis, qubit: usize, outcome: bool) -> Result<f64> {
    let mut s = st.clone();
    match basis {
        Basis::Z => {}
        Basis::X => s.apply(Gate::H, &[qubit])?,
        Basis::Y => {
            s.apply(Gate::Sdg, &[qubit])?;
            s.apply(Gate::H, &[qubit])?;
        }
    }
    let bit = 1usize << qubit;
    Ok(s.amplitudes().iter().enumerate().filter(|(k, _)| (k & bit != 0) == outcome).map(|(_, a)| a.norm_sqr()).sum())
}

/// Contract measured qubits with their eigenkets and the post-selected qubit with <+|.
/// Returns the normalised output (None if post-selection has zero weight) and its weight.
fn reduce_output(circ: &FactoryCircuit, st: &DenseState, outcomes: &[bool]) -> Result<(Option<DenseState>, f64)> {
    let n = circ.logical_qubits;
    let mut last: Vec<Option<[C; 2]>> = vec![None; n];
    for o in &circ.circuit.ops {
        if let Op::Measure { basis, qubit, record } = &o.op {
            last[*qubit] = Some(dense::eigenket(*basis, outcomes[*record]));
        }
    }
    last[circ.postselect] = Some(dense::ket_plus());
    let mut out = st.clone();
    for qb in (0..n).rev() {
        if circ.outputs.contains(&qb) {
            continue;
        }
        let ket = last[qb].ok_or_else(|| Error::Precondition(format!("qubit {qb} is neither output nor measured")))?;
        out = out.contract(qb, ket)?;
    }
    let w = out.norm().powi(2);
    if w < 1e-12 {
        return Ok((None, 0.0));
    }
    out.normalize()?;
    Ok((Some(out), w))
}

/// Cultivation spacetime per T state at p = 1e-7, in qubit-rounds.
pub const CULTIVATION_VOLUME: i64 = 30_000;

/// num_states · V / (num_qubits · 2 · (d+1)^2), rounded to the nearest cycle.
pub fn cultivation_cycles(p_target: f64, d: usize, num_states: usize, num_qubits: usize) -> Result<u32> {
    if (p_target - 1e-7).abs() > 1e-12 {
        return Err(Error::Unsupported(format!("cultivation volume is tabulated only at 1e-7, got {p_target:e}")));
    }
    if num_qubits == 0 {
        return Err(Error::Precondition("need at least one qubit".into()));
    }
    let x = q(num_states as i64 * CULTIVATION_VOLUME, num_qubits as i64 * 2 * ((d as i64 + 1).pow(2)));
    Ok(round_to(x, qi(1)).to_integer() as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimelineEntry {
    #[serde(serialize_with = "ser_q")]
    pub start: Q,
    #[serde(serialize_with = "ser_q")]
    pub duration: Q,
    pub label: String,
    pub slice: u32,
    /// Needs the loop's single port.
    pub uses_port: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactoryReport {
    pub variant: FactoryVariant,
    pub d: usize,
    pub expr: Expr,
    #[serde(serialize_with = "ser_q")]
    pub runtime: Q,
    #[serde(serialize_with = "ser_q")]
    pub space: Q,
    #[serde(serialize_with = "ser_q")]
    pub spacetime: Q,
    pub output_error: f64,
    pub cultivation_cycles: u32,
    pub timeline: Vec<TimelineEntry>,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

pub const P_T: f64 = 1e-7;

pub fn factory_runtime(variant: FactoryVariant, params: &TimingParams, d: usize) -> Result<FactoryReport> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d));
    }
    let spec = ccz_factory_spec(variant);
    let n = variant.loop_occupancy();
    let star = Expr::sym(Sym::TCycStar(n as u32));
    let cnot = crate::costs::gate_time_expr(GateKind::Cnot, Arch::PipelinedFolded, n, d)?;
    let batches = |k: usize| k.div_ceil(params.meas_devices as usize) as i64;
    let cul = cultivation_cycles(P_T, d, 8, spec.logical_qubits)?;
    let t_star = effective_cycle_time(n, params, None)?;
    let t_cnot = gate_time(GateKind::Cnot, Arch::PipelinedFolded, n, d, params)?;
    let mut timeline = Vec::new();
    let mut clock = Q::zero();
    let mut push = |label: &str, slice: u32, dur: Q, port: bool| {
        timeline.push(TimelineEntry { start: clock, duration: dur, label: label.into(), slice, uses_port: port });
        clock += dur;
    };
    push("cultivation", 0, qi(cul as i64) * t_star, false);
    let y_cycles = q(1, 2) * qi(d as i64) + qi(2);
    let mut expr = star.clone() * qi(cul as i64);
    for s in &spec.slices {
        let ops = spec.ops_in_slice(s.index);
        for o in &ops {
            let is_cx = matches!(o, Op::Gate { gate: Gate::CX, .. } | Op::Cond { gate: Gate::CX, .. });
            if is_cx {
                push("CNOT", s.index, t_cnot, true);
                expr = expr + cnot.clone();
            }
        }
        let zm = ops.iter().filter(|o| matches!(o, Op::Measure { basis: Basis::Z, .. })).count();
        if zm > 0 {
            push("Z-measure", s.index, qi(batches(zm)) * params.t_meas, false);
            expr = expr + Expr::sym(Sym::TMeas) * batches(zm);
        }
        let ym = ops.iter().filter(|o| matches!(o, Op::Measure { basis: Basis::Y, .. })).count();
        if ym > 0 {
            push("Y-measure", s.index, qi(batches(ym)) * y_cycles * t_star, false);
            expr = expr + (star.times_d() * q(1, 2) + star.clone() * 2) * batches(ym);
        }
        for o in &ops {
            if matches!(o, Op::Cond { gate: Gate::S, .. }) {
                let ts = crate::costs::gate_time_expr(GateKind::S, Arch::PipelinedFolded, n, d)?;
                push("S", s.index, ts.eval(params, d)?, true);
                expr = expr + ts;
            }
        }
        if s.stabilizer_round {
            push("stabilizer round", s.index, t_star, false);
            expr = expr + star.clone();
        }
    }
    let runtime = expr.eval(params, d)?;
    debug_assert_eq!(runtime, clock);
    let space = q(1, 2) * qi(if variant == FactoryVariant::Folded { 1 } else { 2 });
    Ok(FactoryReport {
        variant,
        d,
        expr,
        runtime,
        space,
        spacetime: runtime * space,
        output_error: 28.0 * P_T * P_T,
        cultivation_cycles: cul,
        timeline,
    })
}

/// No two port-using entries overlap in time.
pub fn port_serialised(timeline: &[TimelineEntry]) -> bool {
    let mut v: Vec<&TimelineEntry> = timeline.iter().filter(|e| e.uses_port).collect();
    v.sort_by_key(|a| a.start);
    v.windows(2).all(|w| w[1].start >= w[0].start + w[0].duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;

    #[test]
    fn circuit_shapes() {
        let f = ccz_factory_spec(FactoryVariant::Folded);
        assert_eq!(f.count(Gate::CX), 13);
        assert_eq!(f.count_measurements(Basis::Z), 4);
        assert_eq!(f.count_conditioned(Gate::S), 4);
        assert_eq!(f.stabilizer_rounds(), 7);
        let s4: Vec<_> = f.ops_in_slice(4);
        assert_eq!(s4.len(), 4);
        assert!(s4.iter().all(|o| matches!(o, Op::Gate { gate: Gate::CX, qubits } if qubits[1] >= 4)));
        assert!(f.circuit.layers_disjoint());
        let r = ccz_factory_spec(FactoryVariant::Rotated);
        assert_eq!(r.logical_qubits, 12);
        assert_eq!(r.count(Gate::CX), 17);
        assert_eq!(r.count_conditioned(Gate::CX), 4);
        assert_eq!(r.count_measurements(Basis::Z), 4);
        assert_eq!(r.count_measurements(Basis::Y), 4);
        assert_eq!(r.count_conditioned(Gate::Z), 4);
        assert_eq!(r.stabilizer_rounds(), 8);
    }

    #[test]
    fn folded_distils() {
        let v = verify_factory(&ccz_factory_spec(FactoryVariant::Folded)).unwrap();
        assert_eq!(v.branches, 16);
        assert!(v.min_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn rotated_distils() {
        let v = verify_factory(&ccz_factory_spec(FactoryVariant::Rotated)).unwrap();
        assert_eq!(v.branches, 256);
        assert!(v.min_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn zero_inputs_fail() {
        let e = verify_factory_with(Exec::Sequential, &ccz_factory_spec(FactoryVariant::Folded), dense::ket0()).unwrap_err();
        assert!(matches!(e, Error::FactoryBranch { .. }));
    }

    #[test]
    fn cultivation() {
        assert_eq!(cultivation_cycles(1e-7, 25, 8, 8).unwrap(), 22);
        assert_eq!(cultivation_cycles(1e-7, 25, 8, 12).unwrap(), 15);
        assert_eq!(cultivation_cycles(1e-7, 25, 8, 16).unwrap(), 11);
        assert!(cultivation_cycles(1e-6, 25, 8, 8).is_err());
    }

    #[test]
    fn runtimes() {
        let p = TimingParams::silicon();
        let f = factory_runtime(FactoryVariant::Folded, &p, 25).unwrap();
        let r = factory_runtime(FactoryVariant::Rotated, &p, 25).unwrap();
        assert_eq!(f.runtime, q(4_311_250, 20));
        assert!((to_f64(&f.runtime) - 216_000.0).abs() < 1000.0);
        assert!((to_f64(&r.runtime) - 279_000.0).abs() < 1000.0);
        assert!((to_f64(&(r.spacetime / f.spacetime)) - 2.6).abs() < 0.05);
        assert_eq!(f.expr.coefficient(Sym::TCycStar(16), 0), qi(33));
        assert_eq!(r.expr.coefficient(Sym::TCycStar(12), 1), qi(1));
        assert_eq!(r.expr.coefficient(Sym::TCycStar(12), 0), qi(27));
        assert!(port_serialised(&f.timeline) && port_serialised(&r.timeline));
        assert!((f.output_error - 2.8e-13).abs() < 1e-20);
    }
}
