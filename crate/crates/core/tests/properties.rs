use num_complex::Complex64;
use pipefold::circuit::{run, Basis, Gate, ScheduledCircuit};
use pipefold::costs::{self, Arch, GateKind};
use pipefold::dense::DenseState;
use pipefold::expr::{Expr, Sym};
use pipefold::layout::{self, Routing};
use pipefold::loopsim::{self, LoopState, ParkSide, SwapOptions};
use pipefold::parallel::Exec;
use pipefold::rational::{q, qi, Q};
use pipefold::report::Quantity;
use pipefold::surface_codes::{self, PatchKind};
use pipefold::tableau::StabilizerState;
use pipefold::{Error, TimingParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CLIFFORDS: [Gate; 9] = [Gate::H, Gate::S, Gate::Sdg, Gate::X, Gate::Y, Gate::Z, Gate::CX, Gate::CZ, Gate::Swap];

#[derive(Clone, Debug)]
enum Step {
    Gate(Gate, usize, usize),
    Measure(Basis, usize),
}

fn circuit(n: usize) -> impl Strategy<Value = Vec<Step>> {
    let step = prop_oneof![
        4 => (0..CLIFFORDS.len(), 0..n, 1..n).prop_map(move |(g, a, k)| Step::Gate(CLIFFORDS[g], a, (a + k) % n)),
        1 => (0..3usize, 0..n).prop_map(|(b, q)| Step::Measure([Basis::X, Basis::Y, Basis::Z][b], q)),
    ];
    prop::collection::vec(step, 1..40)
}

fn build(n: usize, steps: &[Step]) -> ScheduledCircuit {
    let mut c = ScheduledCircuit::new(n);
    for (t, s) in steps.iter().enumerate() {
        match *s {
            Step::Gate(g, a, b) if g.arity() == 2 => c.gate(t as u32, g, &[a, b]),
            Step::Gate(g, a, _) => c.gate(t as u32, g, &[a]),
            Step::Measure(basis, q) => {
                c.measure(t as u32, basis, q);
            }
        }
    }
    c
}

fn params() -> impl Strategy<Value = TimingParams> {
    (1..2000i64, 0..500i64, 0..500i64, 0..3000i64, 0..1000i64, 1..6u32, 0..1000i64, 0..5000i64).prop_map(
        |(l, a, b, m, i, dev, s, c)| TimingParams {
            t_loop: qi(l),
            t_1q: qi(a),
            t_2q: qi(b),
            t_meas: qi(m),
            t_int: qi(i),
            meas_devices: dev,
            slack: qi(s),
            t_cyc_std: qi(c),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tableau_and_dense_agree(n in 2..=6usize, steps in (2..=6usize).prop_flat_map(circuit), seed in any::<u64>()) {
        let steps: Vec<Step> = steps.into_iter().map(|s| match s {
            Step::Gate(g, a, b) => Step::Gate(g, a % n, if b % n == a % n { (a + 1) % n } else { b % n }),
            Step::Measure(basis, q) => Step::Measure(basis, q % n),
        }).collect();
        let c = build(n, &steps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tab = StabilizerState::new(n);
        let tr = run(&mut tab, &c, &[], &mut rng).unwrap();
        prop_assert!(tab.is_well_formed());
        prop_assert_eq!(tab.stabilizer_rank(), n);
        // Replay the tableau's outcomes on the state vector.
        let forced: Vec<Option<bool>> = tr.outcomes.iter().map(|&o| Some(o)).collect();
        let mut den = DenseState::new(n).unwrap();
        let dr = run(&mut den, &c, &forced, &mut rng).unwrap();
        prop_assert_eq!(&tr.deterministic, &dr.deterministic);
        for s in tab.stabilizers() {
            let e = den.expectation(s);
            prop_assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-9, "<{}> = {}", s, e);
        }
    }

    #[test]
    fn gates_keep_tableau_rank(n in 1..=8usize, gates in prop::collection::vec((0..CLIFFORDS.len(), any::<usize>(), any::<usize>()), 0..60)) {
        let mut st = StabilizerState::new(n);
        for (g, a, b) in gates {
            let g = CLIFFORDS[g];
            let (a, b) = (a % n, b % n);
            match (g.arity(), a == b) {
                (1, _) => st.apply(g, &[a]).unwrap(),
                (_, false) => st.apply(g, &[a, b]).unwrap(),
                _ => continue,
            }
            prop_assert_eq!(st.stabilizer_rank(), n);
        }
        prop_assert!(st.is_well_formed());
    }

    #[test]
    fn repeated_rounds_repeat_syndromes(d in prop::sample::select(vec![3usize, 5]), folded in any::<bool>(), seed in any::<u64>()) {
        let kind = if folded { PatchKind::Folded } else { PatchKind::Rotated };
        let p = surface_codes::build_patch(d, kind).unwrap();
        let mut st = surface_codes::encoded_state(&p, seed).unwrap();
        let c = surface_codes::check_circuit(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let a = run(&mut st, &c, &[], &mut rng).unwrap();
        let b = run(&mut st, &c, &[], &mut rng).unwrap();
        let checks: Vec<usize> = c.checks.clone();
        for r in checks {
            prop_assert!(a.deterministic[r] && b.deterministic[r]);
            prop_assert_eq!(a.outcomes[r], b.outcomes[r]);
        }
    }

    #[test]
    fn swap_trace_matches_closed_form(n in 2..=12usize, off in 0..96i64, a in any::<usize>(), b in any::<usize>(), physical in any::<bool>()) {
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let p = TimingParams::silicon();
        let offset = q(off, 8 * n as i64);
        let mut st = LoopState::evenly_spaced(n, offset, p.t_loop);
        let pa = st.position(a).unwrap();
        let pb = st.position(b).unwrap();
        let out = loopsim::swap_protocol(&mut st, a, b, "CX", &p, &SwapOptions { physical, resync: Q::from_integer(0) }).unwrap();
        prop_assert!(out.schedule.tokens_disjoint());
        if !physical {
            prop_assert_eq!(out.shuttle_laps, loopsim::swap_cost(pa, pb));
            prop_assert!(out.shuttle_laps <= costs::swap_worst_laps());
        }
        prop_assert!(st.port().is_empty());
        ring_positions_distinct(&st)?;
    }

    #[test]
    fn rearrange_trace_matches_closed_form(perm in (2..=7usize).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()), off in 0..56i64, keep in any::<bool>()) {
        let n = perm.len();
        let p = TimingParams::silicon();
        let side = if keep { ParkSide::PreserveOrientation } else { ParkSide::Nearest };
        let offset = q(off, 8 * n as i64);
        let mut st = LoopState::evenly_spaced(n, offset, p.t_loop);
        let pos: Vec<Q> = (0..n).map(|t| st.position(t).unwrap()).collect();
        let (closed, _) = loopsim::rearrange_cost(&pos, &perm, side).unwrap();
        let out = loopsim::rearrange(&mut st, &perm, &p, side).unwrap();
        prop_assert_eq!(out.laps, closed);
        prop_assert!(out.schedule.tokens_disjoint());
        if side == ParkSide::Nearest {
            prop_assert!(out.laps <= costs::rearrange_worst(n).unwrap());
        }
        ring_positions_distinct(&st)?;
    }

    #[test]
    fn stack_cnot_within_worst_case(half in 2..=8usize, off in 0..128i64, i in any::<usize>(), j in any::<usize>()) {
        let n = 2 * half;
        let (i, j) = (i % half, j % half);
        prop_assume!(i != j);
        let p = TimingParams::silicon();
        let offset = q(off, 8 * n as i64);
        let out = loopsim::cnot_stack(n, offset, i, j, &p).unwrap();
        prop_assert_eq!(out.shuttle_laps, loopsim::cnot_stack_cost(n, offset, i, j).unwrap());
        prop_assert!(out.shuttle_laps <= costs::cnot_worst_laps(n));
        prop_assert!(out.schedule.tokens_disjoint());
    }

    #[test]
    fn gate_time_is_monotone(base in params(), field in 0..7usize, bump in 1..2000i64, n in prop::sample::select(vec![2usize, 4, 8, 12, 16]), d in 3..40usize) {
        let mut up = base.clone();
        let b = qi(bump);
        match field {
            0 => up.t_loop += b,
            1 => up.t_1q += b,
            2 => up.t_2q += b,
            3 => up.t_meas += b,
            4 => up.t_int += b,
            5 => up.slack += b,
            _ => up.t_cyc_std += b,
        }
        for arch in Arch::ALL {
            for gate in GateKind::ALL {
                match (costs::gate_time(gate, arch, n, d, &base), costs::gate_time(gate, arch, n, d, &up)) {
                    (Ok(lo), Ok(hi)) => prop_assert!(lo <= hi, "{:?} {:?}: {} > {}", arch, gate, lo, hi),
                    (Err(Error::Unsupported(_)), Err(Error::Unsupported(_))) => {}
                    other => prop_assert!(false, "{:?}", other),
                }
            }
        }
    }

    #[test]
    fn expressions_print_and_parse_back(terms in prop::collection::vec((-50..50i64, 1..9i64, 0..3u8, 0..8usize), 0..6)) {
        let syms = [Sym::TLoop, Sym::T1q, Sym::T2q, Sym::TMeas, Sym::TInt, Sym::TCyc, Sym::TCycStar(16), Sym::Ns];
        let e = terms.iter().fold(Expr::zero(), |acc, &(p, r, k, s)| acc + Expr::term(q(p, r), k, syms[s]));
        let back = Expr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(&back, &e);
    }

    #[test]
    fn quantities_reevaluate_exactly(p in params(), n in prop::sample::select(vec![2usize, 4, 8, 12, 16]), d in 3..40usize) {
        for arch in Arch::ALL {
            for gate in GateKind::ALL {
                if let Ok(e) = costs::gate_time_expr(gate, arch, n, d) {
                    let qn = Quantity::new("t", &e, &p, Some(d)).unwrap();
                    prop_assert_eq!(qn.reevaluate(&p).unwrap(), qn.exact);
                }
            }
        }
    }

    #[test]
    fn witnesses_reverify(seed in any::<u64>()) {
        let (lay, reqs, _) = layout::random_instance(seed);
        if let Routing::Feasible { paths, .. } = layout::routable(&lay, &reqs).unwrap() {
            prop_assert!(layout::verify_paths(&lay, &reqs, &paths).is_ok());
        }
    }

    #[test]
    fn freeing_a_cell_keeps_feasibility(seed in any::<u64>()) {
        let r = layout::monotonicity_trials(Exec::Sequential, 4, seed).unwrap();
        prop_assert!(r.violations.is_empty(), "{:?}", r.violations);
    }
}

fn ring_positions_distinct(st: &LoopState) -> Result<(), TestCaseError> {
    let mut pos: Vec<Q> = st.ring_tokens().iter().map(|&t| st.position(t).unwrap()).collect();
    pos.sort();
    prop_assert!(pos.windows(2).all(|w| w[0] != w[1]), "{:?}", pos);
    Ok(())
}
