//! Aaronson-Gottesman stabilizer tableau with destabilizers.

use crate::circuit::{Basis, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    // rows[0..n] destabilizers, rows[n..2n] stabilizers
    rows: Vec<PauliString>,
}

/// Outcome bit (false = +1 eigenvalue) and whether it was forced by the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureResult {
    pub outcome: bool,
    pub deterministic: bool,
}

impl StabilizerState {
    /// |0...0>.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliString::from_ops(n, &[(q, Pauli::X)]));
        }
        for q in 0..n {
            rows.push(PauliString::from_ops(n, &[(q, Pauli::Z)]));
        }
        StabilizerState { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
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

    pub fn apply(&mut self, gate: Gate, qs: &[usize]) -> Result<()> {
        if gate.arity() != qs.len() {
            return Err(Error::Precondition(format!("{} expects {} targets", gate.name(), gate.arity())));
        }
        self.check(qs)?;
        let f: fn(&mut PauliString, &[usize]) = match gate {
            Gate::H => |p, q| p.conj_h(q[0]),
            Gate::S => |p, q| p.conj_s(q[0]),
            Gate::Sdg => |p, q| p.conj_sdg(q[0]),
            Gate::X => |p, q| p.conj_x(q[0]),
            Gate::Y => |p, q| p.conj_y(q[0]),
            Gate::Z => |p, q| p.conj_z(q[0]),
            Gate::CX => |p, q| p.conj_cx(q[0], q[1]),
            Gate::CZ => |p, q| p.conj_cz(q[0], q[1]),
            Gate::Swap => |p, q| p.conj_swap(q[0], q[1]),
            Gate::T => return Err(Error::UnsupportedGate("T".into())),
        };
        for r in self.rows.iter_mut() {
            f(r, qs);
        }
        Ok(())
    }

    /// Deterministic value of a Hermitian Pauli, if any: Some(false) for +1.
    pub fn peek(&self, p: &PauliString) -> Option<bool> {
        let n = self.n;
        if self.stabilizers().iter().any(|s| !s.commutes(p)) {
            return None;
        }
        let mut acc = PauliString::identity(n);
        for i in 0..n {
            if !self.rows[i].commutes(p) {
                acc.mul_assign_right(&self.rows[n + i]);
            }
        }
        // p = i^(kp - kacc) * acc, acc has eigenvalue +1
        debug_assert!(acc.same_bits(p));
        let k = (p.relative_phase() + 4 - acc.relative_phase()) % 4;
        match k {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }

    /// Measure a Hermitian Pauli. Random outcomes take `forced` when given, else draw from `rng`.
    pub fn measure_pauli<R: Rng>(
        &mut self,
        p: &PauliString,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<MeasureResult> {
        let n = self.n;
        let pivot = (n..2 * n).find(|&i| !self.rows[i].commutes(p));
        match pivot {
            None => {
                let outcome = self.peek(p).ok_or_else(|| Error::Precondition("non-Hermitian measurement".into()))?;
                if let Some(f) = forced {
                    if f != outcome {
                        return Err(Error::ForcedOutcome);
                    }
                }
                Ok(MeasureResult { outcome, deterministic: true })
            }
            Some(piv) => {
                let prow = self.rows[piv].clone();
                for i in 0..2 * n {
                    if i != piv && !self.rows[i].commutes(p) {
                        self.rows[i].mul_assign_right(&prow);
                    }
                }
                self.rows[piv - n] = prow;
                let outcome = forced.unwrap_or_else(|| rng.gen::<bool>());
                let mut np = p.clone();
                if outcome {
                    np.negate();
                }
                self.rows[piv] = np;
                Ok(MeasureResult { outcome, deterministic: false })
            }
        }
    }

    /// Single-qubit measurement; Y is conjugated onto Z by S† then H.
    pub fn measure<R: Rng>(
        &mut self,
        basis: Basis,
        q: usize,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<MeasureResult> {
        self.check(&[q])?;
        match basis {
            Basis::Z => self.measure_pauli(&PauliString::from_ops(self.n, &[(q, Pauli::Z)]), forced, rng),
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

    /// GF(2) rank of the stabilizer rows.
    pub fn stabilizer_rank(&self) -> usize {
        crate::pauli::StabilizerGroup::from_generators(self.n, self.stabilizers()).rank()
    }

    /// Symplectic pairing check: destabilizer i anticommutes only with stabilizer i.
    pub fn is_well_formed(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if !self.rows[n + i].commutes(&self.rows[n + j]) {
                    return false;
                }
                if self.rows[i].commutes(&self.rows[n + j]) == (i == j) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn hh_is_identity() {
        let mut s = StabilizerState::new(1);
        s.apply(Gate::H, &[0]).unwrap();
        s.apply(Gate::H, &[0]).unwrap();
        let r = s.measure(Basis::Z, 0, None, &mut rng()).unwrap();
        assert_eq!(r, MeasureResult { outcome: false, deterministic: true });
    }

    #[test]
    fn cnot_flow() {
        let mut s = StabilizerState::new(2);
        s.apply(Gate::H, &[0]).unwrap();
        s.apply(Gate::CX, &[0, 1]).unwrap();
        assert_eq!(s.peek(&PauliString::parse("XX").unwrap()), Some(false));
        assert_eq!(s.peek(&PauliString::parse("ZZ").unwrap()), Some(false));
        assert_eq!(s.peek(&PauliString::parse("YY").unwrap()), Some(true));
        assert_eq!(s.peek(&PauliString::parse("ZI").unwrap()), None);
    }

    #[test]
    fn y_measure_eigenstate() {
        let mut s = StabilizerState::new(1);
        s.apply(Gate::H, &[0]).unwrap();
        s.apply(Gate::S, &[0]).unwrap();
        let r = s.measure(Basis::Y, 0, None, &mut rng()).unwrap();
        assert_eq!(r, MeasureResult { outcome: false, deterministic: true });
    }

    #[test]
    fn t_rejected() {
        let mut s = StabilizerState::new(1);
        assert_eq!(s.apply(Gate::T, &[0]), Err(Error::UnsupportedGate("T".into())));
    }

    #[test]
    fn forced_random_outcome() {
        let mut s = StabilizerState::new(1);
        s.apply(Gate::H, &[0]).unwrap();
        let r = s.measure(Basis::Z, 0, Some(true), &mut rng()).unwrap();
        assert!(r.outcome && !r.deterministic);
        assert_eq!(s.peek(&PauliString::parse("Z").unwrap()), Some(true));
        assert!(s.is_well_formed());
    }
}
