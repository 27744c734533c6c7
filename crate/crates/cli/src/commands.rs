//! One function per subcommand; each fills a report document.

use pipefold::costs::{self, Arch, GateKind, TableGate};
use pipefold::expr::{Expr, Sym};
use pipefold::factory::{self, FactoryVariant};
use pipefold::layout::{self, Fixture, Plan, Routing};
use pipefold::loopsim::{self, LoopState, ParkSide, Protocol, SwapOptions, TimedSchedule};
use pipefold::parallel::Exec;
use pipefold::protocols::{self, VerifyGate};
use pipefold::rational::{fmt_decimal, fmt_q, q, qi, Q};
use pipefold::report::{time_ns_with_decimal, Check, Document, Quantity, Section};
use pipefold::surface_codes::{self, PatchKind};
use pipefold::{Result, TimingParams};
use std::path::Path;

fn laps_expr(laps: Q, extra: Expr) -> Expr {
    Expr::term(laps, 0, Sym::TLoop) + extra
}

fn schedule_rows(s: &TimedSchedule) -> Vec<Vec<String>> {
    s.events
        .iter()
        .map(|e| {
            vec![
                fmt_q(&e.start),
                fmt_q(&e.duration),
                e.action.label(),
                e.loop_id.to_string(),
                e.tokens.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
            ]
        })
        .collect()
}

const EVENT_COLUMNS: [&str; 5] = ["start", "duration", "action", "loop", "tokens"];

pub fn verify(doc: &mut Document, d: usize, gate: VerifyGate, seed: u64) -> Result<()> {
    let checks = protocols::verify_protocols(d, gate, seed)?;
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.engine.to_string(),
                c.expected.clone(),
                c.found.clone().unwrap_or_else(|| "-".into()),
                c.detail.clone(),
            ]
        })
        .collect();
    for c in &checks {
        doc.checks.push(Check::new(format!("{} ({}, d = {})", c.name, c.engine, c.distance), c.pass, c.detail.clone()));
    }
    let sec = Section::new(format!("logical actions, d = {d}"))
        .table(&["protocol", "engine", "expected", "found", "detail"], rows)
        .data(&checks);
    if gate == VerifyGate::All {
        for kind in [PatchKind::Rotated, PatchKind::Folded] {
            let p = surface_codes::build_patch(d, kind)?;
            let m = surface_codes::midcycle_group(&p)?;
            let profile: Vec<String> = m.weight_profile().iter().map(|(w, c)| format!("{c}x{w}")).collect();
            doc.checks.push(Check::new(
                format!("mid-cycle group is the unrotated code ({kind:?}, d = {d})"),
                m.matches_reference(),
                format!("{} active qubits, generator weights {}", m.active_qubits.len(), profile.join(" ")),
            ));
            doc.checks.push(Check::new(
                format!("full round restores the rotated group ({kind:?}, d = {d})"),
                surface_codes::round_trip_restores(&p)?,
                String::new(),
            ));
        }
    }
    doc.sections.push(sec);
    Ok(())
}

pub fn cycle_time(doc: &mut Document, n: usize, params: &TimingParams) -> Result<()> {
    let t2 = costs::t_cyc2_expr();
    let mut sec = Section::new(format!("cycle time, n = {n}"));
    sec = sec.quantity(Quantity::new("T_cyc(2)", &t2, params, None)?);
    if n == 2 {
        let p = surface_codes::build_patch(3, PatchKind::Folded)?;
        let emb = surface_codes::embed_stack(&[p], params)?;
        let sim = loopsim::simulate_cycle(&emb, params)?;
        let closed = t2.eval(params, 0)?;
        doc.checks.push(Check::new(
            "traced cycle equals the closed form",
            sim.makespan == closed,
            format!("trace {} vs closed form {}", time_ns_with_decimal(&sim.makespan), time_ns_with_decimal(&closed)),
        ));
        let rows = sim
            .phases
            .iter()
            .map(|p| vec![p.name.clone(), fmt_q(&p.duration), fmt_q(&p.laps), p.limiting.clone()])
            .collect();
        sec = sec.table(&["phase", "duration (ns)", "laps", "limiting loop"], rows).data(&sim.phases);
    } else {
        let r = loopsim::pipeline_model(n, params, 1)?;
        sec = sec
            .quantity(Quantity::ns(format!("pipeline steady state, n = {n}, m = {}", params.meas_devices), r.steady_state))
            .quantity(Quantity::new(format!("T_cyc*({n})"), &Expr::sym(Sym::TCycStar(n as u32)), params, None)?);
    }
    doc.sections.push(sec);
    Ok(())
}

pub fn gate_times(doc: &mut Document, n: usize, d: usize, params: &TimingParams) -> Result<()> {
    let mut sec = Section::new(format!("gate times, n = {n}, d = {d}"));
    let mut rows = Vec::new();
    for arch in Arch::ALL {
        for gate in GateKind::ALL {
            match costs::gate_time_expr(gate, arch, n, d) {
                Ok(e) => {
                    let qn = Quantity::new(format!("{} {}", arch.name(), gate.name()), &e, params, Some(d))?;
                    rows.push(vec![arch.name().into(), gate.name().into(), qn.expr.clone(), time_ns_with_decimal(&qn.exact)]);
                    sec = sec.quantity(qn);
                }
                Err(pipefold::Error::Unsupported(why)) => {
                    rows.push(vec![arch.name().into(), gate.name().into(), "-".into(), format!("unsupported: {why}")]);
                }
                Err(e) => return Err(e),
            }
        }
    }
    for k in [12, 16] {
        sec = sec.quantity(Quantity::new(format!("T_cyc*({k})"), &Expr::sym(Sym::TCycStar(k)), params, None)?);
    }
    doc.sections.push(sec.table(&["architecture", "gate", "expression", "value"], rows));
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SimProtocol {
    Swap,
    PhysicalSwap,
    Rearrange,
    CnotStack,
    Cycle,
    Pipeline,
}

pub struct SimArgs {
    pub protocol: SimProtocol,
    pub n: usize,
    pub offset: Q,
    pub a: usize,
    pub b: usize,
    pub target: Option<Vec<usize>>,
    pub rounds: usize,
    pub preserve_orientation: bool,
}

pub fn simulate(doc: &mut Document, a: &SimArgs, params: &TimingParams) -> Result<()> {
    let lap = params.t_loop;
    let side = if a.preserve_orientation { ParkSide::PreserveOrientation } else { ParkSide::Nearest };
    let (title, sched, quantities, data) = match a.protocol {
        SimProtocol::Swap | SimProtocol::PhysicalSwap => {
            let mut st = LoopState::evenly_spaced(a.n, a.offset, lap);
            let physical = a.protocol == SimProtocol::PhysicalSwap;
            let opts = SwapOptions { physical, resync: Q::from_integer(0) };
            let out = loopsim::swap_protocol(&mut st, a.a, a.b, "SWAP", params, &opts)?;
            let pa = a.offset + q(a.a as i64, a.n as i64);
            let pb = a.offset + q(a.b as i64, a.n as i64);
            let closed = loopsim::swap_cost(pa, pb);
            doc.checks.push(Check::new("shuttling equals the closed form", out.shuttle_laps == closed, format!("{} laps", fmt_q(&closed))));
            doc.checks.push(Check::new("no token in two events at once", out.schedule.tokens_disjoint(), ""));
            let gate = if physical { Expr::zero() } else { Expr::sym(Sym::T2q) };
            let qn = Quantity::new("makespan", &laps_expr(out.shuttle_laps, gate), params, None)?;
            ("intra-loop interaction", out.schedule.clone(), vec![qn], serde_json::to_value(&out).ok())
        }
        SimProtocol::Rearrange => {
            let target = a.target.clone().unwrap_or_else(|| loopsim::EXAMPLE_TARGET.to_vec());
            let mut st = LoopState::evenly_spaced(target.len(), a.offset, lap);
            let out = loopsim::rearrange(&mut st, &target, params, side)?;
            let pos: Vec<Q> = (0..target.len()).map(|i| a.offset + q(i as i64, target.len() as i64)).collect();
            let (closed, _) = loopsim::rearrange_cost(&pos, &target, side)?;
            doc.checks.push(Check::new("shuttling equals the closed form", out.laps == closed, format!("{} laps", fmt_q(&closed))));
            doc.checks.push(Check::new("no token in two events at once", out.schedule.tokens_disjoint(), ""));
            let qn = Quantity::new("makespan", &laps_expr(out.laps, Expr::zero()), params, None)?;
            ("rearrangement", out.schedule.clone(), vec![qn], serde_json::to_value(&out).ok())
        }
        SimProtocol::CnotStack => {
            let out = loopsim::cnot_stack(a.n, a.offset, a.a, a.b, params)?;
            let closed = loopsim::cnot_stack_cost(a.n, a.offset, a.a, a.b)?;
            doc.checks.push(Check::new("shuttling equals the closed form", out.shuttle_laps == closed, format!("{} laps", fmt_q(&closed))));
            doc.checks.push(Check::new("no token in two events at once", out.schedule.tokens_disjoint(), ""));
            let qn = Quantity::new("makespan", &laps_expr(out.shuttle_laps, Expr::sym(Sym::T2q) * 2), params, None)?;
            ("transversal CNOT in a stack", out.schedule.clone(), vec![qn], serde_json::to_value(&out).ok())
        }
        SimProtocol::Cycle => {
            let p = surface_codes::build_patch(3, PatchKind::Folded)?;
            let emb = surface_codes::embed_stack(&[p], params)?;
            let out = loopsim::simulate_cycle(&emb, params)?;
            let closed = costs::t_cyc2_expr();
            doc.checks.push(Check::new("traced cycle equals the closed form", out.makespan == closed.eval(params, 0)?, ""));
            let qn = Quantity::new("T_cyc(2)", &closed, params, None)?;
            ("stabilizer round", out.schedule.clone(), vec![qn], serde_json::to_value(&out.phases).ok())
        }
        SimProtocol::Pipeline => {
            let r = loopsim::pipeline_model(a.n, params, a.rounds)?;
            let rows: Vec<Vec<String>> = (0..r.completions.len())
                .map(|k| {
                    vec![
                        (k + 1).to_string(),
                        fmt_decimal(&r.completions[k], 3),
                        fmt_decimal(&r.last[k], 3),
                        fmt_decimal(&r.increments[k], 3),
                        fmt_decimal(&r.averages[k], 3),
                    ]
                })
                .collect();
            let sec = Section::new(format!("measurement pipeline, n = {}, m = {}", a.n, params.meas_devices))
                .quantity(Quantity::ns("steady state", r.steady_state))
                .quantity(Quantity::ns(format!("running average after {} rounds", a.rounds), *r.averages.last().expect("rounds >= 1")))
                .table(&["round", "mean completion (ns)", "last completion (ns)", "increment (ns)", "average (ns)"], rows)
                .data(&r);
            doc.sections.push(sec);
            return Ok(());
        }
    };
    let mut sec = Section::new(title).table(&EVENT_COLUMNS, schedule_rows(&sched));
    sec.quantities = quantities;
    sec.data = data.unwrap_or_default();
    doc.sections.push(sec);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SearchProtocol {
    Swap,
    Rearrange,
    RearrangeOriented,
    CnotStack,
}

pub fn worst_case(doc: &mut Document, proto: SearchProtocol, n: usize, k: Option<i64>, exec: Exec, params: &TimingParams) -> Result<()> {
    let k = k.unwrap_or(8 * n as i64);
    let (p, closed, gates) = match proto {
        SearchProtocol::Swap => (Protocol::Swap, Some(costs::swap_worst_laps()), Expr::sym(Sym::T2q)),
        SearchProtocol::Rearrange => (Protocol::Rearrange(ParkSide::Nearest), Some(costs::rearrange_worst(n)?), Expr::zero()),
        SearchProtocol::RearrangeOriented => (Protocol::Rearrange(ParkSide::PreserveOrientation), None, Expr::zero()),
        SearchProtocol::CnotStack => (Protocol::CnotStack, Some(costs::cnot_worst_laps(n)), Expr::sym(Sym::T2q) * 2),
    };
    let r = loopsim::worst_case_search_with(exec, p, n, q(1, k), params)?;
    let mut sec = Section::new(format!("worst case of {}, n = {n}, granularity 1/{k}", p.name()))
        .quantity(Quantity::new("search makespan", &laps_expr(r.laps, gates.clone()), params, None)?);
    if let Some(c) = closed {
        sec = sec.quantity(Quantity::new("closed-form makespan", &laps_expr(c, gates), params, None)?);
        doc.checks.push(Check::new(
            format!("search equals closed form ({}, n = {n})", p.name()),
            r.laps == c,
            format!("search {} laps, closed form {} laps", fmt_q(&r.laps), fmt_q(&c)),
        ));
    }
    let w = &r.witness;
    let mut rows = vec![vec!["offset".to_string(), fmt_q(&w.offset)], vec!["offsets searched".into(), r.offsets.to_string()]];
    if let Some((i, j)) = w.pair {
        rows.push(vec!["pair".into(), format!("{i}, {j}")]);
    }
    if let Some(t) = &w.target {
        rows.push(vec!["target".into(), t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")]);
        rows.push(vec!["mirrored".into(), w.mirrored.to_string()]);
    }
    doc.sections.push(sec.table(&["witness", "value"], rows).data(&r));
    Ok(())
}

pub fn factory(doc: &mut Document, variant: FactoryVariant, d: usize, verify: bool, params: &TimingParams) -> Result<()> {
    let r = factory::factory_runtime(variant, params, d)?;
    let rows = r
        .timeline
        .iter()
        .map(|e| vec![fmt_q(&e.start), fmt_q(&e.duration), e.label.clone(), e.slice.to_string(), e.uses_port.to_string()])
        .collect();
    let runtime = Quantity::new("runtime", &r.expr, params, Some(d))?;
    let mut sec = Section::new(format!("{} 8T-to-CCZ factory, d = {d}", variant.name()))
        .quantity(runtime)
        .table(&["start (ns)", "duration (ns)", "step", "slice", "port"], rows)
        .data(&r);
    sec.quantities.push(Quantity::ns("space-time (patch-ns)", r.spacetime));
    doc.sections.push(sec);
    doc.checks.push(Check::new("port-using steps never overlap", factory::port_serialised(&r.timeline), ""));
    let mut facts = Section::new("factory summary").table(
        &["quantity", "value"],
        vec![
            vec!["runtime (us)".into(), fmt_decimal(&(r.runtime / qi(1000)), 4)],
            vec!["output error".into(), format!("{:.1e}", r.output_error)],
            vec!["cultivation cycles".into(), r.cultivation_cycles.to_string()],
            vec!["space (patches)".into(), fmt_q(&r.space)],
        ],
    );
    if verify {
        let circ = factory::ccz_factory_spec(variant);
        let v = factory::verify_factory(&circ);
        let (pass, detail) = match &v {
            Ok(v) => (
                v.min_fidelity > 1.0 - factory::FIDELITY_TOLERANCE,
                format!("{} reachable of {} branches, min fidelity {:.12}", v.reachable, v.branches, v.min_fidelity),
            ),
            Err(e) => (false, e.to_string()),
        };
        doc.checks.push(Check::new("every measurement branch yields CCZ", pass, detail));
        if let Ok(v) = v {
            facts.rows.push(vec!["branches verified".into(), v.branches.to_string()]);
            facts.rows.push(vec!["acceptance probability".into(), format!("{:.6}", v.acceptance)]);
        }
    }
    doc.sections.push(facts);
    Ok(())
}

pub fn table1(doc: &mut Document, d: usize, params: &TimingParams) -> Result<()> {
    let r = costs::table1(params, d)?;
    let mut sec = Section::new(format!("space-time comparison, d = {d}"));
    let mut rows = Vec::new();
    for e in &r.entries {
        let qn = Quantity::new(format!("{} {}", e.gate.name(), e.arch.name()), &e.runtime, params, Some(d))?;
        rows.push(vec![
            e.gate.name().into(),
            e.arch.name().into(),
            qn.expr.clone(),
            fmt_decimal(&(e.runtime_ns / qi(1000)), 3),
            fmt_q(&e.space),
        ]);
        sec = sec.quantity(qn);
    }
    sec = sec.table(&["gate", "architecture", "runtime", "runtime (us)", "space (patches)"], rows);
    let srows = r
        .savings
        .iter()
        .map(|s| vec![s.gate.name().into(), s.versus.name().into(), s.formula.clone(), fmt_decimal(&s.factor, 3)])
        .collect();
    let sav = Section::new(format!("space-time savings of the folded pipeline, d = {d}"))
        .table(&["gate", "versus", "saving", "at this d"], srows)
        .data(&r);
    doc.sections.push(sec);
    doc.sections.push(sav);
    let f = r.saving(TableGate::Factory, Arch::PipelinedRotated).expect("tabulated");
    doc.checks.push(Check::new("factory saving is finite and above 1", f.factor > qi(1), fmt_decimal(&f.factor, 3)));
    Ok(())
}

pub fn layout(doc: &mut Document, path: &Path, budget: usize) -> Result<()> {
    let f = Fixture::load(path)?;
    let mut sec = Section::new(format!("layout {}", f.name));
    let mut rows = Vec::new();
    for l in 0..f.layout.num_layers() {
        for (r, line) in f.layout.render_layer(l).into_iter().enumerate() {
            rows.push(vec![if r == 0 { format!("{l} ({:?})", f.layout.roles[l]) } else { String::new() }, line]);
        }
    }
    sec = sec.table(&["layer", "cells"], rows);
    let direct = layout::routable(&f.layout, &f.requests)?;
    if let Routing::Feasible { paths, .. } = &direct {
        let ok = layout::verify_paths(&f.layout, &f.requests, paths).is_ok();
        doc.checks.push(Check::new("witness paths re-verify", ok, ""));
    }
    let plan = layout::plan_with_swaps(&f.layout, &f.requests, budget)?;
    let names: Vec<String> = f.requests.iter().map(|r| r.to_string()).collect();
    let mut prow = vec![
        vec!["requests".to_string(), names.join(", ")],
        vec!["routable without swaps".into(), direct.is_feasible().to_string()],
    ];
    match &plan {
        Plan::Found { swaps, paths, states } => {
            let mut after = f.layout.clone();
            for s in swaps {
                after.apply_swap(s)?;
            }
            let ok = layout::verify_paths(&after, &f.requests, paths).is_ok();
            doc.checks.push(Check::new("planned paths re-verify", ok, ""));
            prow.push(vec!["minimal swaps".into(), swaps.len().to_string()]);
            for s in swaps {
                prow.push(vec!["swap".into(), format!("patch {} at {:?}: layer {} -> {}", s.patch, s.cell, s.from_layer, s.to_layer)]);
            }
            for p in paths {
                prow.push(vec![format!("path {}", names[p.request]), format!("layer {}: {:?}", p.layer, p.cells)]);
            }
            prow.push(vec!["arrangements explored".into(), states.to_string()]);
        }
        Plan::Infeasible { budget, states, exhausted } => {
            prow.push(vec!["minimal swaps".into(), format!("none within {budget}")]);
            prow.push(vec!["arrangements explored".into(), format!("{states} (exhaustive: {exhausted})")]);
        }
    }
    if let Some(want) = f.expect.routable {
        doc.checks.push(Check::new("routability matches the fixture", direct.is_feasible() == want, format!("expected {want}")));
    }
    if let Some(want) = f.expect.plannable {
        let got = plan.num_swaps().is_some();
        doc.checks.push(Check::new("plannability matches the fixture", got == want, format!("expected {want} within {budget}")));
    }
    if let Some(want) = f.expect.min_swaps {
        let got = plan.num_swaps();
        doc.checks.push(Check::new("minimal swap count matches the fixture", got == Some(want), format!("expected {want}, got {got:?}")));
    }
    #[derive(serde::Serialize)]
    struct Out<'a> {
        direct: &'a Routing,
        plan: &'a Plan,
    }
    doc.sections.push(sec);
    doc.sections.push(Section::new("routing").table(&["item", "value"], prow).data(&Out { direct: &direct, plan: &plan }));
    Ok(())
}

pub fn parse_offset(s: &str) -> std::result::Result<Q, String> {
    pipefold::rational::parse_q(s).ok_or_else(|| format!("not a rational: {s}"))
}

pub fn parse_target(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad index {t:?}")))
        .collect()
}

pub fn verify_gate(s: &str) -> std::result::Result<VerifyGate, String> {
    match s.to_ascii_lowercase().as_str() {
        "s" => Ok(VerifyGate::S),
        "h" => Ok(VerifyGate::H),
        "cnot" => Ok(VerifyGate::Cnot),
        "all" => Ok(VerifyGate::All),
        _ => Err(format!("expected S, H, CNOT or all, got {s}")),
    }
}
