//! Dense statevector oracle for at most 20 qubits. Qubit q is bit q of the basis index.

use crate::circuit::{Basis, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::tableau::MeasureResult;
use num_complex::Complex64 as C;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

pub const MAX_QUBITS: usize = 20;
const EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    amps: Vec<C>,
}

impl DenseState {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Precondition(format!("dense state limited to {MAX_QUBITS} qubits")));
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[0] = C::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if 1usize << n != amps.len() || n > MAX_QUBITS {
            return Err(Error::Precondition("amplitude count must be a power of two".into()));
        }
        let mut s = DenseState { n, amps };
        s.normalize()?;
        Ok(s)
    }

    /// Product state; `qs[q]` is the single-qubit state of qubit q.
    pub fn product(qs: &[[C; 2]]) -> Result<Self> {
        let mut amps = vec![C::new(1.0, 0.0)];
        for (q, v) in qs.iter().enumerate() {
            let mut next = vec![C::new(0.0, 0.0); amps.len() * 2];
            for (i, a) in amps.iter().enumerate() {
                next[i] = a * v[0];
                next[i | (1 << q)] = a * v[1];
            }
            amps = next;
        }
        Self::from_amplitudes(amps)
    }

    /// Haar-ish random state from Gaussian-free uniform components; only genericity matters.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Result<Self> {
        let amps = (0..1usize << n).map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        Self::from_amplitudes(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let nrm = self.norm();
        if nrm < EPS {
            return Err(Error::Precondition("zero vector".into()));
        }
        for a in self.amps.iter_mut() {
            *a /= nrm;
        }
        Ok(nrm)
    }

    fn check(&self, qs: &[usize]) -> Result<()> {
        for (i, &q) in qs.iter().enumerate() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange(q));
            }
            if qs[..i].contains(&q) {
                return Err(Error::DuplicateTargets);
            }
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: [[C; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply(&mut self, gate: Gate, qs: &[usize]) -> Result<()> {
        if gate.arity() != qs.len() {
            return Err(Error::Precondition(format!("{} expects {} targets", gate.name(), gate.arity())));
        }
        self.check(qs)?;
        let z = C::new(0.0, 0.0);
        let o = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        let h = C::new(FRAC_1_SQRT_2, 0.0);
        match gate {
            Gate::H => self.apply_1q(qs[0], [[h, h], [h, -h]]),
            Gate::S => self.apply_1q(qs[0], [[o, z], [z, i]]),
            Gate::Sdg => self.apply_1q(qs[0], [[o, z], [z, -i]]),
            Gate::X => self.apply_1q(qs[0], [[z, o], [o, z]]),
            Gate::Y => self.apply_1q(qs[0], [[z, -i], [i, z]]),
            Gate::Z => self.apply_1q(qs[0], [[o, z], [z, -o]]),
            Gate::T => self.apply_1q(qs[0], [[o, z], [z, C::from_polar(1.0, std::f64::consts::FRAC_PI_4)]]),
            Gate::CX => {
                let (c, t) = (1usize << qs[0], 1usize << qs[1]);
                for k in 0..self.amps.len() {
                    if k & c != 0 && k & t == 0 {
                        self.amps.swap(k, k | t);
                    }
                }
            }
            Gate::CZ => {
                let m = (1usize << qs[0]) | (1usize << qs[1]);
                for k in 0..self.amps.len() {
                    if k & m == m {
                        self.amps[k] = -self.amps[k];
                    }
                }
            }
            Gate::Swap => {
                let (a, b) = (1usize << qs[0], 1usize << qs[1]);
                for k in 0..self.amps.len() {
                    if k & a != 0 && k & b == 0 {
                        self.amps.swap(k, (k & !a) | b);
                    }
                }
            }
        }
        Ok(())
    }

    /// P|psi> for a Pauli string with its phase.
    pub fn apply_pauli(&self, p: &PauliString) -> Vec<C> {
        let (mut xm, mut zm) = (0usize, 0usize);
        for q in 0..self.n {
            if p.x_bit(q) {
                xm |= 1 << q;
            }
            if p.z_bit(q) {
                zm |= 1 << q;
            }
        }
        // X^x Z^z, prefactor i^phase where phase = relative + #Y
        let ny = (xm & zm).count_ones() as u8;
        let k = (p.relative_phase() + ny) % 4;
        let ph = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)][k as usize];
        let mut out = vec![C::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let s = if (zm & b).count_ones() % 2 == 1 { -ph } else { ph };
            out[b ^ xm] = a * s;
        }
        out
    }

    /// Project onto the +1 eigenspace of each operator and renormalize.
    pub fn project_onto(&mut self, gens: &[PauliString]) -> Result<f64> {
        for g in gens {
            let pg = self.apply_pauli(g);
            for (a, b) in self.amps.iter_mut().zip(pg) {
                *a = (*a + b) * 0.5;
            }
        }
        self.normalize()
    }

    pub fn expectation(&self, p: &PauliString) -> C {
        let pv = self.apply_pauli(p);
        self.amps.iter().zip(pv).map(|(a, b)| a.conj() * b).sum()
    }

    fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(k, _)| k & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Z-projection onto `outcome`, returning its probability.
    pub fn project_z(&mut self, q: usize, outcome: bool) -> Result<f64> {
        let bit = 1usize << q;
        for (k, a) in self.amps.iter_mut().enumerate() {
            if (k & bit != 0) != outcome {
                *a = C::new(0.0, 0.0);
            }
        }
        let nrm = self.norm();
        if nrm < 1e-9 {
            return Err(Error::ForcedOutcome);
        }
        self.normalize()?;
        Ok(nrm * nrm)
    }

    pub fn measure<R: Rng>(&mut self, basis: Basis, q: usize, forced: Option<bool>, rng: &mut R) -> Result<MeasureResult> {
        self.check(&[q])?;
        match basis {
            Basis::Z => {
                let p1 = self.prob_one(q);
                let deterministic = !(1e-9..=1.0 - 1e-9).contains(&p1);
                let outcome = match forced {
                    Some(f) => f,
                    None if deterministic => p1 > 0.5,
                    None => rng.gen::<f64>() < p1,
                };
                self.project_z(q, outcome)?;
                Ok(MeasureResult { outcome, deterministic })
            }
            Basis::X => {
                self.apply(Gate::H, &[q])?;
                let r = self.measure(Basis::Z, q, forced, rng);
                self.apply(Gate::H, &[q])?;
                r
            }
            Basis::Y => {
                self.apply(Gate::Sdg, &[q])?;
                self.apply(Gate::H, &[q])?;
                let r = self.measure(Basis::Z, q, forced, rng);
                self.apply(Gate::H, &[q])?;
                self.apply(Gate::S, &[q])?;
                r
            }
        }
    }

    pub fn reset<R: Rng>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        let r = self.measure(Basis::Z, q, None, rng)?;
        if r.outcome {
            self.apply(Gate::X, &[q])?;
        }
        Ok(())
    }

    /// Contract qubit q with <bra|, dropping it; returns the unnormalized state.
    pub fn contract(&self, q: usize, bra: [C; 2]) -> Result<DenseState> {
        self.check(&[q])?;
        let bit = 1usize << q;
        let low = bit - 1;
        let mut out = vec![C::new(0.0, 0.0); self.amps.len() / 2];
        for (k, a) in self.amps.iter().enumerate() {
            let j = (k & low) | ((k >> 1) & !low);
            let b = if k & bit != 0 { bra[1] } else { bra[0] };
            out[j] += b.conj() * a;
        }
        Ok(DenseState { n: self.n - 1, amps: out })
    }

    /// |<self|other>|^2 for normalized states; global phase quotiented out.
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.overlap(&other.amps).norm_sqr()
    }

    pub fn overlap(&self, other: &[C]) -> C {
        self.amps.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

pub fn ket0() -> [C; 2] {
    [C::new(1.0, 0.0), C::new(0.0, 0.0)]
}
pub fn ket1() -> [C; 2] {
    [C::new(0.0, 0.0), C::new(1.0, 0.0)]
}
pub fn ket_plus() -> [C; 2] {
    [C::new(FRAC_1_SQRT_2, 0.0), C::new(FRAC_1_SQRT_2, 0.0)]
}
pub fn ket_minus() -> [C; 2] {
    [C::new(FRAC_1_SQRT_2, 0.0), C::new(-FRAC_1_SQRT_2, 0.0)]
}
pub fn ket_i() -> [C; 2] {
    [C::new(FRAC_1_SQRT_2, 0.0), C::new(0.0, FRAC_1_SQRT_2)]
}
pub fn ket_minus_i() -> [C; 2] {
    [C::new(FRAC_1_SQRT_2, 0.0), C::new(0.0, -FRAC_1_SQRT_2)]
}
pub fn ket_t() -> [C; 2] {
    [C::new(FRAC_1_SQRT_2, 0.0), C::from_polar(FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4)]
}

/// Post-measurement single-qubit state for a recorded outcome.
pub fn eigenket(basis: Basis, outcome: bool) -> [C; 2] {
    match (basis, outcome) {
        (Basis::Z, false) => ket0(),
        (Basis::Z, true) => ket1(),
        (Basis::X, false) => ket_plus(),
        (Basis::X, true) => ket_minus(),
        (Basis::Y, false) => ket_i(),
        (Basis::Y, true) => ket_minus_i(),
    }
}
