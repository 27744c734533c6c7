//! Transversal logical Cliffords on folded patches and stacks.

use crate::circuit::{Basis, Gate, ScheduledCircuit};
use crate::error::{Error, Result};
use crate::logical::{self, CodeSpec, LogicalAction};
use crate::pauli::{Pauli, PauliString};
use crate::surface_codes::{self, LoopEmbedding, LoopRole, PatchKind, PatchSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Crease pattern: S on data, S† on absorbed ancillas, starting at the (0,0) corner.
/// The crease holds 2d-1 qubits mid-cycle.
pub fn canonical_alternation(d: usize) -> Vec<Gate> {
    (0..2 * d - 1).map(|k| if k % 2 == 0 { Gate::S } else { Gate::Sdg }).collect()
}

pub fn inverted_alternation(d: usize) -> Vec<Gate> {
    canonical_alternation(d).into_iter().map(|g| if g == Gate::S { Gate::Sdg } else { Gate::S }).collect()
}

fn require_folded(p: &PatchSpec) -> Result<()> {
    if p.kind != PatchKind::Folded {
        return Err(Error::Precondition("transversal S and H need a folded patch".into()));
    }
    Ok(())
}

/// Half a round, the crease S/S† layer with CZ across the fold, then the other half.
pub fn transversal_s_circuit(p: &PatchSpec, alternation: &[Gate]) -> Result<ScheduledCircuit> {
    require_folded(p)?;
    let diag = p.diagonal();
    if alternation.len() != diag.len() {
        return Err(Error::AlternationLength { got: alternation.len(), expected: diag.len() });
    }
    if alternation.iter().any(|g| !matches!(g, Gate::S | Gate::Sdg)) {
        return Err(Error::Precondition("alternation entries must be S or S-dagger".into()));
    }
    let mut c = ScheduledCircuit::new(p.num_qubits());
    surface_codes::first_half(p, &mut c);
    for (&q, &g) in diag.iter().zip(alternation) {
        c.gate(4, g, &[q]);
    }
    for (a, b) in p.fold_pairs() {
        c.gate(5, Gate::CZ, &[a, b]);
    }
    surface_codes::second_half(p, &mut c, 6);
    Ok(c)
}

/// Half a round, H on data and absorbed ancillas, SWAP across the fold, then the other half.
pub fn transversal_h_circuit(p: &PatchSpec) -> Result<ScheduledCircuit> {
    require_folded(p)?;
    let mut c = ScheduledCircuit::new(p.num_qubits());
    surface_codes::first_half(p, &mut c);
    for q in 0..p.num_qubits() {
        if q < p.num_data() || p.is_bulk_ancilla(q) {
            c.gate(4, Gate::H, &[q]);
        }
    }
    for (a, b) in p.fold_pairs() {
        c.gate(5, Gate::Swap, &[a, b]);
    }
    surface_codes::second_half(p, &mut c, 6);
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TwoQubitGate {
    Cnot,
    Swap,
}

/// Data code of a stack: patch p owns data qubits p·d²..(p+1)·d².
pub fn stack_code(patch: &PatchSpec, k: usize) -> CodeSpec {
    let one = patch.code();
    let mut code = one.clone();
    for _ in 1..k {
        code = code.direct_sum(&one);
    }
    code
}

/// Pairwise physical gates between matching slots of patches i and j, one pass per layer.
pub fn transversal_two_qubit(stack: &LoopEmbedding, i: usize, j: usize, gate: TwoQubitGate) -> Result<ScheduledCircuit> {
    if i == j {
        return Err(Error::SamePatch);
    }
    if i >= stack.num_patches || j >= stack.num_patches {
        return Err(Error::UnknownPatch(i.max(j) as u32));
    }
    let nd = stack.distance * stack.distance;
    let g = match gate {
        TwoQubitGate::Cnot => Gate::CX,
        TwoQubitGate::Swap => Gate::Swap,
    };
    let mut c = ScheduledCircuit::new(stack.num_patches * nd);
    for layer in 0..2u8 {
        for l in stack.loops.iter().filter(|l| l.role == LoopRole::Data) {
            let find = |p: usize| l.slots.iter().find(|s| s.patch == p && s.layer == layer);
            if let (Some(a), Some(b)) = (find(i), find(j)) {
                c.gate(layer as u32, g, &[i * nd + a.qubit, j * nd + b.qubit]);
            }
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TeleportVariant {
    YMeasure,
    IState,
}

/// Qubit 0 carries the input, qubit 1 the resource.
pub fn s_teleport_circuit(v: TeleportVariant) -> ScheduledCircuit {
    let mut c = ScheduledCircuit::new(2);
    c.reset(0, 1);
    match v {
        TeleportVariant::YMeasure => {
            c.gate(1, Gate::CX, &[0, 1]);
            let r = c.measure(2, Basis::Y, 1);
            // +1 outcome leaves S† on the input
            c.cond(3, &[(r, false)], Gate::Z, &[0]);
        }
        TeleportVariant::IState => {
            c.gate(1, Gate::H, &[1]);
            c.gate(2, Gate::S, &[1]);
            c.gate(3, Gate::CX, &[0, 1]);
            c.gate(4, Gate::H, &[1]);
            c.gate(5, Gate::CX, &[0, 1]);
        }
    }
    c
}

/// Logical S on a folded patch by Y-measuring a second patch after a transversal CNOT.
/// The second patch is prepared in logical |0>; the logical Y measurement and the
/// frame Z act directly on the stabilizer state.
pub fn logical_s_by_y_measure(d: usize, seed: u64) -> Result<LogicalAction> {
    let patch = surface_codes::build_patch(d, PatchKind::Folded)?;
    let stack = surface_codes::embed_stack(&[patch.clone(), patch.clone()], &crate::params::TimingParams::silicon())?;
    let nd = patch.num_data();
    let code = patch.code();
    let np = 2 * nd;
    let n = np + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = logical::choi_state(&code, np, &mut rng)?;
    let anc: Vec<usize> = (nd..2 * nd).collect();
    for s in patch.stabilizer_paulis(nd) {
        st.measure_pauli(&s.embed(n, &anc), Some(false), &mut rng)?;
    }
    let zl = patch.logical_z_pauli(nd).embed(n, &anc);
    st.measure_pauli(&zl, Some(false), &mut rng)?;
    let c = transversal_two_qubit(&stack, 0, 1, TwoQubitGate::Cnot)?;
    crate::circuit::run(&mut st, &c, &[], &mut rng)?;
    let mut yl = patch.logical_x_pauli(nd).mul(&patch.logical_z_pauli(nd));
    yl.mul_phase(1);
    let r = st.measure_pauli(&yl.embed(n, &anc), None, &mut rng)?;
    if !r.outcome {
        for q in &patch.logical_z {
            st.apply(Gate::Z, &[*q])?;
        }
    }
    logical::read_action(&st, &code, np)
}

/// Outcome of one protocol check.
#[derive(Clone, Debug, Serialize)]
pub struct ProtocolCheck {
    pub name: String,
    pub distance: usize,
    pub expected: String,
    pub found: Option<String>,
    pub engine: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check_from(name: &str, d: usize, expected: &str, r: Result<LogicalAction>) -> ProtocolCheck {
    match r {
        Ok(a) => ProtocolCheck {
            name: name.into(),
            distance: d,
            expected: expected.into(),
            found: a.name.clone(),
            engine: "tableau",
            pass: a.is(expected),
            detail: a.describe(),
        },
        Err(e) => ProtocolCheck {
            name: name.into(),
            distance: d,
            expected: expected.into(),
            found: None,
            engine: "tableau",
            pass: false,
            detail: e.to_string(),
        },
    }
}

/// Which protocol family to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyGate {
    S,
    H,
    Cnot,
    All,
}

/// Tableau logical-action checks at distance d, plus dense fidelity for S and H when d = 3.
pub fn verify_protocols(d: usize, which: VerifyGate, seed: u64) -> Result<Vec<ProtocolCheck>> {
    let p = surface_codes::build_patch(d, PatchKind::Folded)?;
    let code = p.code();
    let mut out = Vec::new();
    let want = |g: VerifyGate| which == VerifyGate::All || which == g;
    let dense = |c: &ScheduledCircuit, name: &str, gate: &str| -> ProtocolCheck {
        let f = logical::dense_logical_fidelity(c, &code, gate, seed, 3);
        let (pass, detail) = match &f {
            Ok(f) => ((1.0 - f).abs() < 1e-9, format!("min fidelity {f:.12}")),
            Err(e) => (false, e.to_string()),
        };
        ProtocolCheck {
            name: name.into(),
            distance: d,
            expected: gate.into(),
            found: pass.then(|| gate.to_string()),
            engine: "dense",
            pass,
            detail,
        }
    };
    if want(VerifyGate::S) {
        let s = transversal_s_circuit(&p, &canonical_alternation(d))?;
        out.push(check_from("transversal S", d, "S", logical::logical_action(&s, &code, seed)));
        let sd = transversal_s_circuit(&p, &inverted_alternation(d))?;
        out.push(check_from("transversal S, inverted crease", d, "SDG", logical::logical_action(&sd, &code, seed)));
        let mut ss = s.clone();
        ss.extend(&s);
        out.push(check_from("transversal S twice", d, "Z", logical::logical_action(&ss, &code, seed)));
        out.push(check_from("S by logical Y measurement", d, "S", logical_s_by_y_measure(d, seed)));
        if d == 3 {
            out.push(dense(&s, "transversal S", "S"));
            out.push(dense(&sd, "transversal S, inverted crease", "SDG"));
        }
    }
    if want(VerifyGate::H) {
        let h = transversal_h_circuit(&p)?;
        out.push(check_from("transversal H", d, "H", logical::logical_action(&h, &code, seed)));
        let mut hh = h.clone();
        hh.extend(&h);
        out.push(check_from("transversal H twice", d, "I", logical::logical_action(&hh, &code, seed)));
        if d == 3 {
            out.push(dense(&h, "transversal H", "H"));
        }
    }
    if want(VerifyGate::Cnot) {
        let tp = crate::params::TimingParams::silicon();
        let stack = surface_codes::embed_stack(&[p.clone(), p.clone()], &tp)?;
        let code2 = stack_code(&p, 2);
        let cx = transversal_two_qubit(&stack, 0, 1, TwoQubitGate::Cnot)?;
        out.push(check_from("transversal CNOT", d, "CNOT", logical::logical_action(&cx, &code2, seed)));
        let sw = transversal_two_qubit(&stack, 0, 1, TwoQubitGate::Swap)?;
        out.push(check_from("transversal SWAP", d, "SWAP", logical::logical_action(&sw, &code2, seed)));
        let mut sw2 = sw.clone();
        sw2.extend(&sw);
        out.push(check_from("transversal SWAP twice", d, "I", logical::logical_action(&sw2, &code2, seed)));
        let rot = surface_codes::build_patch(d, PatchKind::Rotated)?;
        let rstack = surface_codes::embed_stack(&[rot.clone(), rot.clone()], &tp)?;
        let rc = transversal_two_qubit(&rstack, 0, 1, TwoQubitGate::Cnot)?;
        out.push(check_from("transversal CNOT, rotated stack", d, "CNOT", logical::logical_action(&rc, &stack_code(&rot, 2), seed)));
        if d == 3 {
            let f = logical::dense_logical_fidelity(&cx, &code2, "CNOT", seed, 2);
            let (pass, detail) = match &f {
                Ok(f) => ((1.0 - f).abs() < 1e-9, format!("min fidelity {f:.12}")),
                Err(e) => (false, e.to_string()),
            };
            out.push(ProtocolCheck {
                name: "transversal CNOT".into(),
                distance: d,
                expected: "CNOT".into(),
                found: pass.then(|| "CNOT".to_string()),
                engine: "dense",
                pass,
                detail,
            });
        }
    }
    Ok(out)
}

/// Random single-qubit Pauli frame check used by the teleport tests.
pub fn logical_pauli(p: &PatchSpec, which: Pauli) -> PauliString {
    let n = p.num_data();
    match which {
        Pauli::X => p.logical_x_pauli(n),
        Pauli::Z => p.logical_z_pauli(n),
        Pauli::Y => {
            let mut y = p.logical_x_pauli(n).mul(&p.logical_z_pauli(n));
            y.mul_phase(1);
            y
        }
        Pauli::I => PauliString::identity(n),
    }
}
