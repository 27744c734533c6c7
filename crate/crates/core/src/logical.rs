//! Logical action of a circuit on a stabilizer code, via a Choi state with reference qubits.

use crate::circuit::{self, Basis, Gate, Op, ScheduledCircuit};
use crate::dense::{self, DenseState};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, StabilizerGroup};
use crate::tableau::StabilizerState;
use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stabilizers and logical representatives over `num_qubits` physical qubits.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub num_qubits: usize,
    pub stabilizers: Vec<PauliString>,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
}

impl CodeSpec {
    pub fn num_logical(&self) -> usize {
        self.logical_x.len()
    }

    /// Block-diagonal sum: `other` occupies qubits after `self`.
    pub fn direct_sum(&self, other: &CodeSpec) -> CodeSpec {
        let n = self.num_qubits + other.num_qubits;
        let left: Vec<usize> = (0..self.num_qubits).collect();
        let right: Vec<usize> = (self.num_qubits..n).collect();
        let l = |p: &PauliString| p.embed(n, &left);
        let r = |p: &PauliString| p.embed(n, &right);
        CodeSpec {
            num_qubits: n,
            stabilizers: self.stabilizers.iter().map(l).chain(other.stabilizers.iter().map(r)).collect(),
            logical_x: self.logical_x.iter().map(l).chain(other.logical_x.iter().map(r)).collect(),
            logical_z: self.logical_z.iter().map(l).chain(other.logical_z.iter().map(r)).collect(),
        }
    }

    /// Physical representative of a k-qubit logical Pauli (sign kept).
    pub fn lift(&self, q: &PauliString, n: usize) -> PauliString {
        let map: Vec<usize> = (0..self.num_qubits).collect();
        let mut out = PauliString::identity(self.num_qubits);
        for i in 0..q.num_qubits() {
            let (x, z) = q.get(i).bits();
            if x {
                out.mul_assign_right(&self.logical_x[i]);
            }
            if z {
                out.mul_assign_right(&self.logical_z[i]);
            }
            if x && z {
                // Y = i X Z
                out.mul_phase(1);
            }
        }
        if q.is_negative() {
            out.negate();
        }
        out.embed(n, &map)
    }

    pub fn validate(&self) -> Result<()> {
        let g = StabilizerGroup::from_generators(self.num_qubits, &self.stabilizers);
        if !g.is_abelian() {
            return Err(Error::Codespace("stabilizers do not commute".into()));
        }
        let k = self.num_logical();
        for i in 0..k {
            for j in 0..k {
                for (a, b, want) in [
                    (&self.logical_x[i], &self.logical_z[j], i != j),
                    (&self.logical_x[i], &self.logical_x[j], true),
                    (&self.logical_z[i], &self.logical_z[j], true),
                ] {
                    if a.commutes(b) != want {
                        return Err(Error::Codespace(format!("logical pair ({i},{j}) has wrong commutation")));
                    }
                }
            }
            for s in &self.stabilizers {
                if !s.commutes(&self.logical_x[i]) || !s.commutes(&self.logical_z[i]) {
                    return Err(Error::Codespace(format!("logical {i} anticommutes with a stabilizer")));
                }
            }
        }
        Ok(())
    }
}

/// Images of the logical generators, X_0..X_{k-1} then Z_0..Z_{k-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalAction {
    pub images: Vec<PauliString>,
    /// Name of the matching known Clifford, exact signs.
    pub name: Option<String>,
    /// Name when signs are ignored (a Pauli frame away).
    pub name_up_to_frame: Option<String>,
}

impl LogicalAction {
    pub fn is(&self, name: &str) -> bool {
        self.name.as_deref() == Some(name)
    }

    pub fn is_up_to_frame(&self, name: &str) -> bool {
        self.name_up_to_frame.as_deref() == Some(name)
    }

    pub fn describe(&self) -> String {
        let k = self.images.len() / 2;
        let mut parts = Vec::new();
        for (i, img) in self.images.iter().enumerate() {
            let lbl = if i < k { format!("X{i}") } else { format!("Z{}", i - k) };
            parts.push(format!("{lbl}->{img}"));
        }
        parts.join(" ")
    }
}

/// Heisenberg images of the generators under a known gate on k logical qubits.
pub fn reference_images(name: &str, k: usize) -> Option<Vec<PauliString>> {
    let gates: Vec<(Gate, Vec<usize>)> = match (name, k) {
        ("I", _) => vec![],
        ("X", 1) => vec![(Gate::X, vec![0])],
        ("Y", 1) => vec![(Gate::Y, vec![0])],
        ("Z", 1) => vec![(Gate::Z, vec![0])],
        ("S", 1) => vec![(Gate::S, vec![0])],
        ("SDG", 1) => vec![(Gate::Sdg, vec![0])],
        ("H", 1) => vec![(Gate::H, vec![0])],
        ("CNOT", 2) => vec![(Gate::CX, vec![0, 1])],
        ("CNOT10", 2) => vec![(Gate::CX, vec![1, 0])],
        ("CZ", 2) => vec![(Gate::CZ, vec![0, 1])],
        ("SWAP", 2) => vec![(Gate::Swap, vec![0, 1])],
        _ => return None,
    };
    let mut out = Vec::with_capacity(2 * k);
    for p in [Pauli::X, Pauli::Z] {
        for i in 0..k {
            let mut s = PauliString::from_ops(k, &[(i, p)]);
            for (g, qs) in &gates {
                conj(&mut s, *g, qs);
            }
            out.push(s);
        }
    }
    Some(out)
}

/// P -> U P U† for a Clifford gate.
pub fn conjugate(s: &mut PauliString, g: Gate, qs: &[usize]) -> Result<()> {
    if g == Gate::T {
        return Err(Error::UnsupportedGate("T".into()));
    }
    conj(s, g, qs);
    Ok(())
}

fn conj(s: &mut PauliString, g: Gate, qs: &[usize]) {
    match g {
        Gate::H => s.conj_h(qs[0]),
        Gate::S => s.conj_s(qs[0]),
        Gate::Sdg => s.conj_sdg(qs[0]),
        Gate::X => s.conj_x(qs[0]),
        Gate::Y => s.conj_y(qs[0]),
        Gate::Z => s.conj_z(qs[0]),
        Gate::CX => s.conj_cx(qs[0], qs[1]),
        Gate::CZ => s.conj_cz(qs[0], qs[1]),
        Gate::Swap => s.conj_swap(qs[0], qs[1]),
        Gate::T => unreachable!("non-Clifford reference"),
    }
}

const KNOWN_1: [&str; 7] = ["I", "S", "SDG", "H", "X", "Y", "Z"];
const KNOWN_2: [&str; 5] = ["I", "CNOT", "CNOT10", "CZ", "SWAP"];

fn name_images(images: &[PauliString], k: usize) -> (Option<String>, Option<String>) {
    let known: &[&str] = match k {
        1 => &KNOWN_1,
        2 => &KNOWN_2,
        _ => &["I"],
    };
    let mut exact = None;
    let mut frame = None;
    for &nm in known {
        let Some(r) = reference_images(nm, k) else { continue };
        if exact.is_none() && r == images {
            exact = Some(nm.to_string());
        }
        if frame.is_none() && r.iter().zip(images).all(|(a, b)| a.same_bits(b)) {
            frame = Some(nm.to_string());
        }
    }
    (exact, frame)
}

/// Every Hermitian unsigned Pauli on k qubits except the identity.
fn all_paulis(k: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    for code in 1..(1usize << (2 * k)) {
        let mut s = PauliString::identity(k);
        for i in 0..k {
            let p = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][(code >> (2 * i)) & 3];
            s.set(i, p);
        }
        out.push(s);
    }
    out
}

/// Choi state: `code` on qubits 0..code.num_qubits entangled with k reference qubits
/// placed after `np` physical qubits.
pub fn choi_state<R: rand::Rng>(code: &CodeSpec, np: usize, rng: &mut R) -> Result<StabilizerState> {
    let k = code.num_logical();
    let n = np + k;
    let mut st = StabilizerState::new(n);
    let map: Vec<usize> = (0..code.num_qubits).collect();
    for s in &code.stabilizers {
        st.measure_pauli(&s.embed(n, &map), Some(false), rng)?;
    }
    for i in 0..k {
        for (l, p) in [(&code.logical_x[i], Pauli::X), (&code.logical_z[i], Pauli::Z)] {
            let mut b = l.embed(n, &map);
            b.mul_assign_right(&PauliString::from_ops(n, &[(np + i, p)]));
            st.measure_pauli(&b, Some(false), rng)?;
        }
    }
    Ok(st)
}

/// Read the logical action off a Choi state prepared by [`choi_state`].
pub fn read_action(st: &StabilizerState, code: &CodeSpec, np: usize) -> Result<LogicalAction> {
    let k = code.num_logical();
    let n = np + k;
    let map: Vec<usize> = (0..code.num_qubits).collect();
    for s in &code.stabilizers {
        match st.peek(&s.embed(n, &map)) {
            Some(false) => {}
            Some(true) => return Err(Error::Codespace(format!("stabilizer {s} ends with sign -1"))),
            None => return Err(Error::Codespace(format!("stabilizer {s} not restored"))),
        }
    }
    let cands = all_paulis(k);
    let mut images = Vec::with_capacity(2 * k);
    for p in [Pauli::X, Pauli::Z] {
        for i in 0..k {
            let refp = PauliString::from_ops(n, &[(np + i, p)]);
            let mut found = None;
            for q in &cands {
                let mut phys = code.lift(q, n);
                phys.mul_assign_right(&refp);
                if let Some(neg) = st.peek(&phys) {
                    found = Some(if neg { q.clone().negated() } else { q.clone() });
                    break;
                }
            }
            let lbl = format!("{}{}", p.symbol(), i);
            images.push(found.ok_or(Error::NotLogical(lbl))?);
        }
    }
    let (name, name_up_to_frame) = name_images(&images, k);
    Ok(LogicalAction { images, name, name_up_to_frame })
}

/// Logical action of `c` on `code`. Physical qubits of the code are circuit qubits
/// 0..code.num_qubits; extra circuit qubits start in |0>. Every record listed in
/// `c.checks` must come out deterministic and +1.
pub fn logical_action(c: &ScheduledCircuit, code: &CodeSpec, seed: u64) -> Result<LogicalAction> {
    let np = c.num_qubits.max(code.num_qubits);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = choi_state(code, np, &mut rng)?;
    let rec = circuit::run(&mut st, c, &[], &mut rng)?;
    for &r in &c.checks {
        if !rec.deterministic[r] {
            return Err(Error::Codespace(format!("check record {r} is random")));
        }
        if rec.outcomes[r] {
            return Err(Error::Codespace(format!("check record {r} flipped")));
        }
    }
    read_action(&st, code, np)
}

/// Logical operator given as a sum of coefficient-weighted k-qubit Paulis.
pub type PauliSum = Vec<(C, PauliString)>;

pub fn pauli_sum(name: &str) -> Option<PauliSum> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let p = |s: &str| PauliString::parse(s).expect("literal");
    Some(match name {
        "I" => vec![(C::new(1.0, 0.0), p("I"))],
        "S" => vec![(C::new(0.5, 0.5), p("I")), (C::new(0.5, -0.5), p("Z"))],
        "SDG" => vec![(C::new(0.5, -0.5), p("I")), (C::new(0.5, 0.5), p("Z"))],
        "H" => vec![(C::new(h, 0.0), p("X")), (C::new(h, 0.0), p("Z"))],
        "CNOT" => vec![
            (C::new(0.5, 0.0), p("II")),
            (C::new(0.5, 0.0), p("ZI")),
            (C::new(0.5, 0.0), p("IX")),
            (C::new(-0.5, 0.0), p("ZX")),
        ],
        "SWAP" => vec![
            (C::new(0.5, 0.0), p("II")),
            (C::new(0.5, 0.0), p("XX")),
            (C::new(0.5, 0.0), p("YY")),
            (C::new(0.5, 0.0), p("ZZ")),
        ],
        _ => return None,
    })
}

/// Dense check at small size: a random code state goes through `c`; ancillas are
/// contracted against their final measured states and the data state is compared
/// with the ideal logical gate. Returns the minimum fidelity over `trials` seeds.
pub fn dense_logical_fidelity(c: &ScheduledCircuit, code: &CodeSpec, gate: &str, seed: u64, trials: usize) -> Result<f64> {
    let op = pauli_sum(gate).ok_or_else(|| Error::Unsupported(format!("dense reference for {gate}")))?;
    let nc = code.num_qubits;
    let np = c.num_qubits.max(nc);
    let mut worst: f64 = 1.0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let mut data = DenseState::random(nc, &mut rng)?;
        data.project_onto(&code.stabilizers)?;
        let mut amps = data.amplitudes().to_vec();
        amps.resize(1 << np, C::new(0.0, 0.0));
        let mut st = DenseState::from_amplitudes(amps)?;
        let rec = circuit::run(&mut st, c, &[], &mut rng)?;
        // last measurement basis on each non-code qubit
        let mut last: Vec<Option<(Basis, usize)>> = vec![None; np];
        for o in &c.ops {
            match &o.op {
                Op::Measure { basis, qubit, record } => last[*qubit] = Some((*basis, *record)),
                Op::Gate { qubits, .. } | Op::Cond { qubits, .. } => {
                    for &q in qubits {
                        last[q] = None;
                    }
                }
                Op::Reset { qubit } => last[*qubit] = None,
            }
        }
        let mut out = st;
        for q in (nc..np).rev() {
            let ket = match last[q] {
                Some((b, r)) => dense::eigenket(b, rec.outcomes[r]),
                None => return Err(Error::Precondition(format!("ancilla {q} not measured at the end"))),
            };
            out = out.contract(q, ket)?;
        }
        out.normalize()?;
        let mut ideal = vec![C::new(0.0, 0.0); 1 << nc];
        for (coef, lp) in &op {
            let v = data.apply_pauli(&code.lift(lp, nc));
            for (a, b) in ideal.iter_mut().zip(v) {
                *a += coef * b;
            }
        }
        let ideal = DenseState::from_amplitudes(ideal)?;
        worst = worst.min(out.fidelity(&ideal));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_code() -> CodeSpec {
        // [[2,1]] with stabilizer XX; logical X = XI... use Z-type repetition: ZZ, X_L = XX, Z_L = ZI
        CodeSpec {
            num_qubits: 2,
            stabilizers: vec![PauliString::parse("ZZ").unwrap()],
            logical_x: vec![PauliString::parse("XX").unwrap()],
            logical_z: vec![PauliString::parse("ZI").unwrap()],
        }
    }

    #[test]
    fn identity_circuit_is_identity() {
        let c = ScheduledCircuit::new(2);
        let a = logical_action(&c, &bell_code(), 1).unwrap();
        assert!(a.is("I"));
    }

    #[test]
    fn reference_tables() {
        let s = reference_images("S", 1).unwrap();
        assert_eq!(s[0].to_string(), "+Y");
        assert_eq!(s[1].to_string(), "+Z");
        let c = reference_images("CNOT", 2).unwrap();
        assert_eq!(c[0].to_string(), "+XX");
        assert_eq!(c[3].to_string(), "+ZZ");
    }

    #[test]
    fn repetition_code_gates() {
        let code = bell_code();
        let mut c = ScheduledCircuit::new(2);
        c.gate(0, Gate::X, &[0]);
        c.gate(0, Gate::X, &[1]);
        let a = logical_action(&c, &code, 2).unwrap();
        assert!(a.is("X"));
        let mut c = ScheduledCircuit::new(2);
        c.gate(0, Gate::Z, &[1]);
        assert!(logical_action(&c, &code, 2).unwrap().is("Z"));
    }

    #[test]
    fn leaving_codespace_is_reported() {
        let mut c = ScheduledCircuit::new(2);
        c.gate(0, Gate::X, &[0]);
        assert!(matches!(logical_action(&c, &bell_code(), 3), Err(Error::Codespace(_))));
    }

    #[test]
    fn dense_matches_for_physical_s() {
        let code = CodeSpec {
            num_qubits: 1,
            stabilizers: vec![],
            logical_x: vec![PauliString::parse("X").unwrap()],
            logical_z: vec![PauliString::parse("Z").unwrap()],
        };
        let mut c = ScheduledCircuit::new(1);
        c.gate(0, Gate::S, &[0]);
        assert!(logical_action(&c, &code, 0).unwrap().is("S"));
        let f = dense_logical_fidelity(&c, &code, "S", 5, 5).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let f = dense_logical_fidelity(&c, &code, "SDG", 5, 5).unwrap();
        assert!(f < 0.99);
    }
}
