//! Exit gate. One PASS/FAIL line per criterion, with sub-check details on failure.
//!
//! Expected values are literals, not results of the functions under test. A
//! criterion listed in `KNOWN_GAPS` is still evaluated and printed as FAIL; the run
//! only breaks if the set of failures differs from it.

use pipefold::costs::{self, Arch, GateKind, TableGate};
use pipefold::factory::{self, FactoryVariant};
use pipefold::layout::{self, Fixture, Plan, HALLWAY_FIXTURE, CHECKERBOARD_FIXTURE};
use pipefold::loopsim::{self, ParkSide, Protocol};
use pipefold::parallel::Exec;
use pipefold::protocols::{self, VerifyGate};
use pipefold::rational::{fmt_decimal, q, qi, to_f64, Q};
use pipefold::surface_codes::{self, PatchKind};
use pipefold::TimingParams;
use std::time::Instant;

/// Criteria that cannot pass as stated, with the reason printed next to them.
const KNOWN_GAPS: &[(u32, &str)] = &[(
    3,
    "T_CNOT at n = 2 has no instance: a two-qubit loop holds a single folded patch, so there is no second patch to target",
)];

struct Crit {
    id: u32,
    title: &'static str,
    subs: Vec<(String, bool)>,
}

impl Crit {
    fn new(id: u32, title: &'static str) -> Self {
        Crit { id, title, subs: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.subs.push((name.into(), ok));
    }

    fn pass(&self) -> bool {
        self.subs.iter().all(|s| s.1)
    }
}

fn silicon() -> TimingParams {
    TimingParams::silicon()
}

fn logical_actions() -> Crit {
    let mut c = Crit::new(1, "transversal S, H, CNOT, SWAP act as claimed at d = 3, 5");
    let t0 = Instant::now();
    for d in [3, 5] {
        match protocols::verify_protocols(d, VerifyGate::All, 11) {
            Ok(checks) => {
                // d = 3 must include the dense oracle for S and H.
                if d == 3 {
                    for g in ["transversal S", "transversal H"] {
                        let dense = checks.iter().any(|k| k.name == g && k.engine == "dense");
                        c.check(format!("{g} has a dense check at d = 3"), dense);
                    }
                }
                for k in checks {
                    c.check(format!("{} ({}, d = {d}): {}", k.name, k.engine, k.detail), k.pass);
                }
            }
            Err(e) => c.check(format!("d = {d}: {e}"), false),
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    c.check(format!("runtime {secs:.1} s < 60 s"), secs < 60.0);
    c
}

fn midcycle() -> Crit {
    let mut c = Crit::new(2, "mid-cycle group is the unrotated code; the round trip restores it");
    for d in [3, 5] {
        for kind in [PatchKind::Rotated, PatchKind::Folded] {
            let p = surface_codes::build_patch(d, kind).unwrap();
            let m = surface_codes::midcycle_group(&p).unwrap();
            // Unrotated code on the active qubits: d^2 + (d-1)^2 qubits.
            let active = d * d + (d - 1) * (d - 1);
            c.check(format!("{kind:?} d = {d}: matches reference"), m.matches_reference());
            c.check(format!("{kind:?} d = {d}: {} active qubits, want {active}", m.active_qubits.len()), m.active_qubits.len() == active);
            c.check(format!("{kind:?} d = {d}: round trip"), surface_codes::round_trip_restores(&p).unwrap());
        }
    }
    c
}

fn timing() -> Crit {
    let mut c = Crit::new(3, "timing closed forms equal simulation exactly");
    let p = silicon();
    let t0 = Instant::now();

    let patch = surface_codes::build_patch(3, PatchKind::Folded).unwrap();
    let emb = surface_codes::embed_stack(&[patch], &p).unwrap();
    let sim = loopsim::simulate_cycle(&emb, &p).unwrap();
    c.check(format!("T_cyc(2) traced = {} ns, want 3150", sim.makespan), sim.makespan == qi(3150));
    let e = costs::t_cyc2_expr();
    c.check(format!("T_cyc(2) expression {e}"), e.to_string() == "27/8·T_loop + 2·T_1q + 4·T_2q + T_meas");

    for n in [2, 4, 8] {
        let r = loopsim::worst_case_search(Protocol::Swap, n, q(1, 8 * n as i64), &p).unwrap();
        c.check(format!("SWAP worst case n = {n}: {} laps, want 5/4", r.laps), r.laps == q(5, 4));
    }

    let r = loopsim::worst_case_search(Protocol::Rearrange(ParkSide::Nearest), 8, q(1, 64), &p).unwrap();
    c.check(format!("rearrange n = 8: {} laps, want 61/16", r.laps), r.laps == q(61, 16));
    c.check(format!("rearrange n = 8: {} ns, want 1525", r.laps * p.t_loop), r.laps * p.t_loop == qi(1525));
    // The example target order, at its worst ring offset.
    let example = (0..64)
        .map(|o| {
            let pos: Vec<Q> = (0..8).map(|i| q(o, 64) + q(i, 8)).collect();
            loopsim::rearrange_cost(&pos, &loopsim::EXAMPLE_TARGET, ParkSide::Nearest).unwrap().0
        })
        .max()
        .unwrap();
    c.check(format!("example target {example} laps, want 61/16"), example == q(61, 16));

    for n in [2usize, 4, 8, 12, 16] {
        // 9/4 - 7/(2n) laps, written out here rather than taken from the cost module.
        let want = q(9 * n as i64 - 14, 4 * n as i64);
        match loopsim::worst_case_search(Protocol::CnotStack, n, q(1, 8 * n as i64), &p) {
            Ok(r) => c.check(format!("T_CNOT({n}): search {} laps, closed form {want}", r.laps), r.laps == want),
            Err(e) => c.check(format!("T_CNOT({n}): not applicable ({e})"), false),
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    c.check(format!("runtime {secs:.1} s < 300 s"), secs < 300.0);
    c
}

fn congestion() -> Crit {
    let mut c = Crit::new(4, "measurement pipeline converges to the congestion bound");
    let p = silicon();
    let r16 = loopsim::pipeline_model(16, &p, 50).unwrap();
    let avg = r16.averages[49];
    let target = qi(16000) / qi(3);
    let rel = to_f64(&((avg - target) / target)).abs();
    c.check(format!("n = 16 average at round 50: {} ns, off by {:.3}%", fmt_decimal(&avg, 3), rel * 100.0), rel < 0.01);
    let r12 = loopsim::pipeline_model(12, &p, 50).unwrap();
    c.check(format!("n = 12 steady state {} ns, want 4000", r12.steady_state), r12.steady_state == qi(4000));
    let settled = r12.increments[1..].iter().all(|x| *x == qi(4000));
    c.check("n = 12 rounds after the first each take 4000 ns", settled);
    c
}

fn gate_times() -> Crit {
    let mut c = Crit::new(5, "folded gate times at silicon defaults");
    let p = silicon();
    let g = |gate, n| costs::gate_time(gate, Arch::PipelinedFolded, n, 25, &p).unwrap();
    let cases: [(&str, Q, Q); 5] = [
        ("T_S", g(GateKind::S, 16), qi(6600)),
        ("T_H", g(GateKind::H, 16), qi(6800)),
        ("T_CNOT(16)", g(GateKind::Cnot, 16), q(10125, 10)),
        ("T_cyc*(16)", costs::effective_cycle_time(16, &p, None).unwrap(), qi(6000)),
        ("T_cyc*(12)", costs::effective_cycle_time(12, &p, None).unwrap(), qi(5000)),
    ];
    for (name, got, want) in cases {
        c.check(format!("{name} = {got} ns, want {want}"), got == want);
    }
    c
}

fn factories() -> Crit {
    let mut c = Crit::new(6, "CCZ factory runtime, error, cultivation and branch verification");
    let p = silicon();
    let f = factory::factory_runtime(FactoryVariant::Folded, &p, 25).unwrap();
    let r = factory::factory_runtime(FactoryVariant::Rotated, &p, 25).unwrap();
    let us = |x: &Q| to_f64(x) / 1000.0;
    c.check(format!("folded runtime {:.4} us, want 216 +- 1", us(&f.runtime)), (us(&f.runtime) - 216.0).abs() <= 1.0);
    c.check(format!("rotated runtime {:.4} us, want 279 +- 1", us(&r.runtime)), (us(&r.runtime) - 279.0).abs() <= 1.0);
    let ratio = to_f64(&r.spacetime) / to_f64(&f.spacetime);
    c.check(format!("spacetime ratio {ratio:.4}, want 2.6 +- 0.05"), (ratio - 2.6).abs() <= 0.05);
    for (name, rep) in [("folded", &f), ("rotated", &r)] {
        let e = format!("{:.1e}", rep.output_error);
        c.check(format!("{name} output error {e}, want 2.8e-13"), e == "2.8e-13");
        c.check(format!("{name} port steps serialised"), factory::port_serialised(&rep.timeline));
    }
    c.check(format!("cultivation cycles {} and {}, want 22 and 15", f.cultivation_cycles, r.cultivation_cycles), (f.cultivation_cycles, r.cultivation_cycles) == (22, 15));
    let t0 = Instant::now();
    for v in [FactoryVariant::Folded, FactoryVariant::Rotated] {
        match factory::verify_factory(&factory::ccz_factory_spec(v)) {
            Ok(res) => c.check(
                format!("{} factory: {}/{} branches, min fidelity {:.12}", v.name(), res.reachable, res.branches, res.min_fidelity),
                res.min_fidelity > 1.0 - 1e-9 && res.reachable > 0,
            ),
            Err(e) => c.check(format!("{} factory: {e}", v.name()), false),
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    c.check(format!("verification runtime {secs:.1} s < 120 s"), secs < 120.0);
    c
}

fn table() -> Crit {
    let mut c = Crit::new(7, "space-time comparison table regenerated");
    let p = silicon();
    let t = costs::table1(&p, 25).unwrap();
    use Arch::{PipelinedFolded as F, PipelinedRotated as R, Standard as S};
    use TableGate::{Cnot, Factory, H, S as Sg};
    // (gate, arch, runtime in us at d = 25, space)
    let cells: [(TableGate, Arch, Q, Q); 12] = [
        (H, S, qi(225), qi(2)),
        (Sg, S, q(225, 2), qi(2)),
        (Cnot, S, qi(150), qi(3)),
        (Factory, S, qi(375), qi(12)),
        (H, R, qi(225), qi(2)),
        (Sg, R, q(225, 2), qi(1)),
        (Cnot, R, qi(1), qi(1)),
        (Factory, R, qi(279), qi(1)),
        (H, F, qi(3), q(1, 2)),
        (Sg, F, qi(3), q(1, 2)),
        (Cnot, F, qi(1), q(1, 2)),
        (Factory, F, qi(216), q(1, 2)),
    ];
    for (g, a, rt, sp) in cells {
        match t.entry(g, a) {
            Some(e) => {
                let got = e.runtime_ns / qi(1000);
                c.check(format!("{} {}: {} us x {}, want {} x {}", g.name(), a.name(), got, e.space, rt, sp), got == rt && e.space == sp);
            }
            None => c.check(format!("{} {} missing", g.name(), a.name()), false),
        }
    }
    let rows: [(TableGate, Arch, &str); 8] = [
        (H, S, "12d"),
        (Sg, S, "6d"),
        (Cnot, S, "36d"),
        (Factory, S, "1.667d"),
        (H, R, "12d"),
        (Sg, R, "3d"),
        (Cnot, R, "2"),
        (Factory, R, "0.046d + 1.426"),
    ];
    for (g, a, want) in rows {
        let s = t.saving(g, a).unwrap();
        c.check(format!("saving {} vs {}: {}, want {want}", g.name(), a.name(), s.formula), s.formula == want);
    }
    let f = t.saving(Factory, R).unwrap();
    c.check(format!("factory row at d = 25: {}", fmt_decimal(&f.factor, 2)), fmt_decimal(&f.factor, 2) == "2.58");
    c
}

fn routing() -> Crit {
    let mut c = Crit::new(8, "layer routing verdicts and monotonicity");
    let a = Fixture::parse(HALLWAY_FIXTURE).unwrap();
    let b = Fixture::parse(CHECKERBOARD_FIXTURE).unwrap();
    let ra = layout::routable(&a.layout, &a.requests).unwrap();
    c.check("hallway instance infeasible", !ra.is_feasible());
    for budget in 0..=8 {
        let pa = layout::plan_with_swaps(&a.layout, &a.requests, budget).unwrap();
        c.check(format!("hallway infeasible within {budget} swaps"), matches!(pa, Plan::Infeasible { exhausted: true, .. }));
    }
    match layout::plan_with_swaps(&b.layout, &b.requests, 8).unwrap() {
        Plan::Found { swaps, paths, .. } => {
            let mut after = b.layout.clone();
            for s in &swaps {
                after.apply_swap(s).unwrap();
            }
            c.check(format!("checkerboard plan uses {} swaps, want 4", swaps.len()), swaps.len() == 4);
            c.check("checkerboard witness paths verify", layout::verify_paths(&after, &b.requests, &paths).is_ok());
            c.check(format!("{} witness paths, want 4", paths.len()), paths.len() == 4);
        }
        Plan::Infeasible { .. } => c.check("checkerboard plan found", false),
    }
    let m = layout::monotonicity_trials(Exec::Parallel, 1000, 2024).unwrap();
    c.check(format!("monotonicity: {} trials, {} violations", m.trials, m.violations.len()), m.trials == 1000 && m.violations.is_empty());
    c
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture or a name filter; a filter
    // that does not mention this target skips it.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let crits = [logical_actions(), midcycle(), timing(), congestion(), gate_times(), factories(), table(), routing()];
    let mut unexpected = Vec::new();
    for c in &crits {
        let gap = KNOWN_GAPS.iter().find(|g| g.0 == c.id);
        println!("{} criterion {}: {}", if c.pass() { "PASS" } else { "FAIL" }, c.id, c.title);
        for (name, ok) in &c.subs {
            if !ok {
                println!("       x {name}");
            }
        }
        if let (false, Some((_, why))) = (c.pass(), gap) {
            println!("       known gap: {why}");
        }
        if c.pass() == gap.is_some() {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcome: {unexpected:?}");
        std::process::exit(1);
    }
}
