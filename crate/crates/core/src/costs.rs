//! Closed-form gate times, baselines, and the space-time comparison table.

use crate::error::{Error, Result};
use crate::expr::{Expr, Sym};
use crate::factory::{factory_runtime, FactoryVariant};
use crate::params::TimingParams;
use crate::rational::{ceil_to, fmt_decimal, fmt_q, q, qi, round_to, Q};
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Standard,
    PipelinedRotated,
    PipelinedFolded,
    Interloop,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::Standard, Arch::PipelinedRotated, Arch::PipelinedFolded, Arch::Interloop];

    pub fn name(&self) -> &'static str {
        match self {
            Arch::Standard => "standard",
            Arch::PipelinedRotated => "pipelined_rotated",
            Arch::PipelinedFolded => "pipelined_folded",
            Arch::Interloop => "interloop",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    S,
    H,
    Cnot,
    Swap,
    Cycle,
}

impl GateKind {
    pub const ALL: [GateKind; 5] = [GateKind::Cycle, GateKind::S, GateKind::H, GateKind::Cnot, GateKind::Swap];

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::S => "S",
            GateKind::H => "H",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::Cycle => "cycle",
        }
    }
}

/// 27/8·T_loop + 2·T_1q + 4·T_2q + T_meas.
pub fn t_cyc2_expr() -> Expr {
    Expr::term(q(27, 8), 0, Sym::TLoop) + Expr::sym(Sym::T1q) * 2 + Expr::sym(Sym::T2q) * 4 + Expr::sym(Sym::TMeas)
}

/// ceil_us( max(T_cyc(2), (n/m)·T_meas) + slack ). `slack` defaults to the parameter set's.
pub fn effective_cycle_time(n: usize, params: &TimingParams, slack: Option<Q>) -> Result<Q> {
    params.validate()?;
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let base = t_cyc2_expr().eval(params, 0)?;
    let congested = qi(n as i64) / qi(params.meas_devices as i64) * params.t_meas;
    let slack = slack.unwrap_or(params.slack);
    Ok(ceil_to(base.max(congested) + slack, qi(1000)))
}

/// Worst-case laps of the intra-stack CNOT: 9/4 − 7/(2n).
pub fn cnot_worst_laps(n: usize) -> Q {
    q(9, 4) - q(7, 2 * n as i64)
}

/// Worst-case laps of the intra-loop interaction.
pub fn swap_worst_laps() -> Q {
    q(5, 4)
}

/// Worst-case laps of a full reordering: n/2 − 3/(2n) (even), n/2 − 2/n (odd).
pub fn rearrange_worst(n: usize) -> Result<Q> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let n = n as i64;
    Ok(if n % 2 == 0 { q(n, 2) - q(3, 2 * n) } else { q(n, 2) - q(2, n) })
}

fn cnot_expr(n: usize) -> Expr {
    Expr::term(cnot_worst_laps(n), 0, Sym::TLoop) + Expr::sym(Sym::T2q) * 2
}

/// Closed form of a gate on an architecture; `n` is the loop occupancy.
pub fn gate_time_expr(gate: GateKind, arch: Arch, n: usize, d: usize) -> Result<Expr> {
    let _ = d;
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let star = Expr::sym(Sym::TCycStar(n as u32));
    let std = Expr::sym(Sym::TCyc);
    let tint = Expr::sym(Sym::TInt);
    Ok(match (arch, gate) {
        (Arch::PipelinedFolded, GateKind::Cycle) | (Arch::PipelinedRotated, GateKind::Cycle) => star,
        (Arch::PipelinedFolded, GateKind::S) => star + Expr::term(q(5, 4), 0, Sym::TLoop) + Expr::sym(Sym::T2q),
        (Arch::PipelinedFolded, GateKind::H) => {
            star + Expr::term(q(5, 4), 0, Sym::TLoop) + Expr::sym(Sym::T1q) + Expr::sym(Sym::T2q)
        }
        (Arch::PipelinedFolded, GateKind::Cnot | GateKind::Swap) => cnot_expr(n),
        (Arch::PipelinedRotated, GateKind::H) => star.times_d() * 3,
        (Arch::PipelinedRotated, GateKind::S) => star.times_d() * q(3, 2),
        (Arch::PipelinedRotated, GateKind::Cnot | GateKind::Swap) => cnot_expr(n),
        (Arch::Standard, GateKind::Cycle) | (Arch::Interloop, GateKind::Cycle) => std,
        (Arch::Standard, GateKind::H) => std.times_d() * 3,
        (Arch::Standard, GateKind::S) => std.times_d() * q(3, 2),
        (Arch::Standard, GateKind::Cnot | GateKind::Swap) => std.times_d() * 2,
        (Arch::Interloop, GateKind::H) => tint.times_d() - tint,
        (Arch::Interloop, GateKind::Swap) => tint.times_d(),
        (Arch::Interloop, GateKind::Cnot) => tint.times_d() * 2,
        (Arch::Interloop, GateKind::S) => {
            return Err(Error::Unsupported("S on the inter-loop architecture has no closed form".into()))
        }
    })
}

pub fn gate_time(gate: GateKind, arch: Arch, n: usize, d: usize, params: &TimingParams) -> Result<Q> {
    gate_time_expr(gate, arch, n, d)?.eval(params, d)
}

/// Gate of the comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableGate {
    H,
    S,
    Cnot,
    Factory,
}

impl TableGate {
    pub const ALL: [TableGate; 4] = [TableGate::H, TableGate::S, TableGate::Cnot, TableGate::Factory];

    pub fn name(&self) -> &'static str {
        match self {
            TableGate::H => "H",
            TableGate::S => "S",
            TableGate::Cnot => "CNOT",
            TableGate::Factory => "8T-to-CCZ",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostEntry {
    pub gate: TableGate,
    pub arch: Arch,
    /// Leading-order runtime as tabulated.
    pub runtime: Expr,
    #[serde(serialize_with = "ser_q")]
    pub runtime_ns: Q,
    /// Full-model runtime, where one exists.
    #[serde(serialize_with = "ser_opt_q")]
    pub exact_ns: Option<Q>,
    #[serde(serialize_with = "ser_q")]
    pub space: Q,
    #[serde(serialize_with = "ser_q")]
    pub spacetime: Q,
}

/// Space-time saving of the folded pipeline, fitted as slope·d + intercept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Saving {
    pub gate: TableGate,
    pub versus: Arch,
    #[serde(serialize_with = "ser_q")]
    pub factor: Q,
    #[serde(serialize_with = "ser_q")]
    pub slope: Q,
    #[serde(serialize_with = "ser_q")]
    pub intercept: Q,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub d: usize,
    pub entries: Vec<CostEntry>,
    pub savings: Vec<Saving>,
}

impl CostReport {
    pub fn entry(&self, gate: TableGate, arch: Arch) -> Option<&CostEntry> {
        self.entries.iter().find(|e| e.gate == gate && e.arch == arch)
    }

    pub fn saving(&self, gate: TableGate, versus: Arch) -> Option<&Saving> {
        self.savings.iter().find(|s| s.gate == gate && s.versus == versus)
    }
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

fn ser_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt_q(v)),
        None => s.serialize_none(),
    }
}

/// Keep the T_cyc* terms and collapse the rest into whole microseconds.
pub fn leading_form(e: &Expr, params: &TimingParams, d: usize) -> Result<Expr> {
    let star = e.filter(|s| matches!(s, Sym::TCycStar(_)));
    let rest = e.filter(|s| !matches!(s, Sym::TCycStar(_))).eval(params, d)?;
    Ok(star + Expr::ns(round_to(rest, qi(1000))))
}

const AREA: [(Arch, [(i64, i64); 4]); 3] = [
    (Arch::Standard, [(2, 1), (2, 1), (3, 1), (12, 1)]),
    (Arch::PipelinedRotated, [(2, 1), (1, 1), (1, 1), (1, 1)]),
    (Arch::PipelinedFolded, [(1, 2), (1, 2), (1, 2), (1, 2)]),
];

fn footprint(arch: Arch, gate: TableGate) -> Q {
    let row = AREA.iter().find(|(a, _)| *a == arch).expect("tabulated architecture").1;
    let (n, d) = row[gate as usize];
    q(n, d)
}

/// Tabulated runtime. Folded H and S count as one cycle, intra-stack CNOTs round to
/// whole microseconds, and factory constants round to whole microseconds.
fn table_runtime(gate: TableGate, arch: Arch, d: usize, params: &TimingParams) -> Result<(Expr, Option<Q>)> {
    let cyc = Expr::sym(Sym::TCyc);
    let us = |x: Q| Expr::ns(round_to(x, qi(1000)));
    Ok(match (gate, arch) {
        (TableGate::H, Arch::PipelinedFolded) => (cyc, Some(gate_time(GateKind::H, arch, 16, d, params)?)),
        (TableGate::S, Arch::PipelinedFolded) => (cyc, Some(gate_time(GateKind::S, arch, 16, d, params)?)),
        (TableGate::H | TableGate::S, Arch::PipelinedRotated) => {
            let k = if gate == TableGate::H { qi(3) } else { q(3, 2) };
            let exact = gate_time(if gate == TableGate::H { GateKind::H } else { GateKind::S }, arch, 12, d, params)?;
            (cyc.times_d() * k, Some(exact))
        }
        (TableGate::H, Arch::Standard) => (cyc.times_d() * 3, None),
        (TableGate::S, Arch::Standard) => (cyc.times_d() * q(3, 2), None),
        (TableGate::Cnot, Arch::Standard) => (cyc.times_d() * 2, None),
        (TableGate::Cnot, Arch::PipelinedRotated) => {
            let x = gate_time(GateKind::Cnot, arch, 12, d, params)?;
            (us(x), Some(x))
        }
        (TableGate::Cnot, Arch::PipelinedFolded) => {
            let x = gate_time(GateKind::Cnot, arch, 16, d, params)?;
            (us(x), Some(x))
        }
        (TableGate::Factory, Arch::Standard) => (cyc.times_d() * 5, None),
        (TableGate::Factory, Arch::PipelinedRotated) => {
            let r = factory_runtime(FactoryVariant::Rotated, params, d)?;
            (leading_form(&r.expr, params, d)?, Some(r.runtime))
        }
        (TableGate::Factory, Arch::PipelinedFolded) => {
            let r = factory_runtime(FactoryVariant::Folded, params, d)?;
            (leading_form(&r.expr, params, d)?, Some(r.runtime))
        }
        (_, Arch::Interloop) => return Err(Error::Unsupported("the table has no inter-loop row".into())),
    })
}

fn table_cells(params: &TimingParams, d: usize) -> Result<Vec<CostEntry>> {
    let mut out = Vec::new();
    for arch in [Arch::Standard, Arch::PipelinedRotated, Arch::PipelinedFolded] {
        for gate in TableGate::ALL {
            let (runtime, exact_ns) = table_runtime(gate, arch, d, params)?;
            let runtime_ns = runtime.eval(params, d)?;
            let space = footprint(arch, gate);
            out.push(CostEntry { gate, arch, runtime, runtime_ns, exact_ns, space, spacetime: runtime_ns * space });
        }
    }
    Ok(out)
}

fn render_linear(slope: Q, intercept: Q) -> String {
    let s = |x: &Q| if x.is_integer() { fmt_q(x) } else { fmt_decimal(x, 3) };
    match (slope.is_zero(), intercept.is_zero()) {
        (true, _) => s(&intercept),
        (false, true) if slope.is_one() => "d".into(),
        (false, true) => format!("{}d", s(&slope)),
        (false, false) => format!("{}d + {}", s(&slope), s(&intercept)),
    }
}

/// Table reproduction at odd distance `d`; savings are spacetime ratios, fitted as linear
/// in d from the tabulated expressions at d and d + 2.
pub fn table1(params: &TimingParams, d: usize) -> Result<CostReport> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d));
    }
    let here = table_cells(params, d)?;
    // Cells are frozen at d (cultivation included); only explicit d terms move.
    let cell = |g: TableGate, a: Arch| here.iter().find(|e| e.gate == g && e.arch == a).expect("cell");
    let at = |e: &CostEntry, dd: usize| -> Result<Q> { Ok(e.runtime.eval(params, dd)? * e.space) };
    let mut savings = Vec::new();
    for versus in [Arch::Standard, Arch::PipelinedRotated] {
        for gate in TableGate::ALL {
            let (o, f) = (cell(gate, versus), cell(gate, Arch::PipelinedFolded));
            let f0 = at(o, d)? / at(f, d)?;
            let f1 = at(o, d + 2)? / at(f, d + 2)?;
            let slope = (f1 - f0) / 2;
            let intercept = f0 - slope * qi(d as i64);
            savings.push(Saving { gate, versus, factor: f0, slope, intercept, formula: render_linear(slope, intercept) });
        }
    }
    Ok(CostReport { d, entries: here, savings })
}
