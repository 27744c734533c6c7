//! Pauli strings as i^k X^x Z^z over packed bit vectors, and stabilizer groups over GF(2).

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    // i^phase X^x Z^z
    phase: u8,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    /// Hermitian Pauli with sign +1 acting as `p` on each listed qubit.
    pub fn from_ops(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, p) in ops {
            s.set(q, p);
        }
        s
    }

    pub fn uniform(n: usize, support: &[usize], p: Pauli) -> Self {
        let ops: Vec<_> = support.iter().map(|&q| (q, p)).collect();
        Self::from_ops(n, &ops)
    }

    /// Parse "+XIZ", "-YY", "XZ" (qubit 0 first).
    pub fn parse(s: &str) -> Option<Self> {
        let (neg, body) = match s.as_bytes().first()? {
            b'+' => (false, &s[1..]),
            b'-' => (true, &s[1..]),
            _ => (false, s),
        };
        let mut out = Self::identity(body.len());
        for (q, ch) in body.chars().enumerate() {
            let p = match ch {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return None,
            };
            out.set(q, p);
        }
        if neg {
            out.negate();
        }
        Some(out)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    fn put(v: &mut [u64], q: usize, b: bool) {
        let m = 1u64 << (q % 64);
        if b {
            v[q / 64] |= m;
        } else {
            v[q / 64] &= !m;
        }
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrite qubit `q` keeping the operator Hermitian with its sign unchanged.
    pub fn set(&mut self, q: usize, p: Pauli) {
        let sign_neg = self.is_negative();
        let (x, z) = p.bits();
        Self::put(&mut self.x, q, x);
        Self::put(&mut self.z, q, z);
        self.phase = self.y_count() as u8 % 4;
        if sign_neg {
            self.phase = (self.phase + 2) % 4;
        }
    }

    fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Phase of the Hermitian normal form: i^(phase - #Y) is the sign.
    fn sign_exponent(&self) -> u8 {
        ((self.phase as i64 - self.y_count() as i64).rem_euclid(4)) as u8
    }

    pub fn is_hermitian(&self) -> bool {
        self.sign_exponent().is_multiple_of(2)
    }

    pub fn is_negative(&self) -> bool {
        self.sign_exponent() == 2
    }

    /// Extra phase relative to the unsigned Hermitian operator with the same bits: i^k.
    pub fn relative_phase(&self) -> u8 {
        self.sign_exponent()
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    pub fn mul_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) % 4;
    }

    pub fn unsigned(&self) -> Self {
        let mut s = self.clone();
        s.phase = s.y_count() as u8 % 4;
        s
    }

    pub fn commutes(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc += (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones();
        }
        acc.is_multiple_of(2)
    }

    /// self <- self * other.
    pub fn mul_assign_right(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        let mut cross = 0u32;
        for w in 0..self.x.len() {
            cross += (self.z[w] & other.x[w]).count_ones();
        }
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * cross) % 4) as u8;
        for w in 0..self.x.len() {
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.mul_assign_right(other);
        s
    }

    pub fn same_bits(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }

    /// Tensor product self ⊗ other.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::identity(self.n + other.n);
        for q in 0..self.n {
            Self::put(&mut out.x, q, self.x_bit(q));
            Self::put(&mut out.z, q, self.z_bit(q));
        }
        for q in 0..other.n {
            Self::put(&mut out.x, self.n + q, other.x_bit(q));
            Self::put(&mut out.z, self.n + q, other.z_bit(q));
        }
        out.phase = (self.phase + other.phase) % 4;
        out
    }

    /// Embed into `m >= n` qubits, qubit q mapped to `map[q]`.
    pub fn embed(&self, m: usize, map: &[usize]) -> Self {
        let mut out = Self::identity(m);
        for q in 0..self.n {
            Self::put(&mut out.x, map[q], self.x_bit(q));
            Self::put(&mut out.z, map[q], self.z_bit(q));
        }
        out.phase = self.phase;
        out
    }

    /// Keep qubits listed in `keep` (in that order). Caller guarantees the rest is identity.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut out = Self::identity(keep.len());
        for (i, &q) in keep.iter().enumerate() {
            Self::put(&mut out.x, i, self.x_bit(q));
            Self::put(&mut out.z, i, self.z_bit(q));
        }
        out.phase = self.phase;
        out
    }

    /// Symplectic vector: x bits then z bits.
    pub fn symplectic(&self) -> Vec<bool> {
        let mut v = Vec::with_capacity(2 * self.n);
        v.extend((0..self.n).map(|q| self.x_bit(q)));
        v.extend((0..self.n).map(|q| self.z_bit(q)));
        v
    }

    pub fn bit(&self, col: usize) -> bool {
        if col < self.n {
            self.x_bit(col)
        } else {
            self.z_bit(col - self.n)
        }
    }

    // Heisenberg conjugation P -> U P U†.

    pub fn conj_h(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.phase = (self.phase + 2) % 4;
        }
        Self::put(&mut self.x, q, z);
        Self::put(&mut self.z, q, x);
    }

    pub fn conj_s(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x {
            self.phase = (self.phase + 1) % 4;
        }
        Self::put(&mut self.z, q, z ^ x);
    }

    pub fn conj_sdg(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x {
            self.phase = (self.phase + 3) % 4;
        }
        Self::put(&mut self.z, q, z ^ x);
    }

    pub fn conj_x(&mut self, q: usize) {
        if self.z_bit(q) {
            self.phase = (self.phase + 2) % 4;
        }
    }

    pub fn conj_z(&mut self, q: usize) {
        if self.x_bit(q) {
            self.phase = (self.phase + 2) % 4;
        }
    }

    pub fn conj_y(&mut self, q: usize) {
        if self.x_bit(q) ^ self.z_bit(q) {
            self.phase = (self.phase + 2) % 4;
        }
    }

    pub fn conj_cx(&mut self, c: usize, t: usize) {
        let xc = self.x_bit(c);
        let zt = self.z_bit(t);
        let xt = self.x_bit(t);
        let zc = self.z_bit(c);
        Self::put(&mut self.x, t, xt ^ xc);
        Self::put(&mut self.z, c, zc ^ zt);
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let xa = self.x_bit(a);
        let xb = self.x_bit(b);
        if xa && xb {
            self.phase = (self.phase + 2) % 4;
        }
        let za = self.z_bit(a);
        let zb = self.z_bit(b);
        Self::put(&mut self.z, a, za ^ xb);
        Self::put(&mut self.z, b, zb ^ xa);
    }

    pub fn conj_swap(&mut self, a: usize, b: usize) {
        let (xa, za) = (self.x_bit(a), self.z_bit(a));
        let (xb, zb) = (self.x_bit(b), self.z_bit(b));
        Self::put(&mut self.x, a, xb);
        Self::put(&mut self.z, a, zb);
        Self::put(&mut self.x, b, xa);
        Self::put(&mut self.z, b, za);
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign_exponent() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{s}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A commuting set of Hermitian Paulis reduced to echelon form for membership tests.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    n: usize,
    // (pivot column, row) sorted by insertion; rows are actual group elements
    rows: Vec<(usize, PauliString)>,
}

impl StabilizerGroup {
    pub fn new(n: usize) -> Self {
        StabilizerGroup { n, rows: Vec::new() }
    }

    pub fn from_generators<'a>(n: usize, gens: impl IntoIterator<Item = &'a PauliString>) -> Self {
        let mut g = Self::new(n);
        for p in gens {
            g.insert(p.clone());
        }
        g
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, p: &PauliString) -> PauliString {
        let mut r = p.clone();
        for (piv, row) in &self.rows {
            if r.bit(*piv) {
                r.mul_assign_right(row);
            }
        }
        r
    }

    /// Returns false when `p` is already generated (up to phase).
    pub fn insert(&mut self, p: PauliString) -> bool {
        let r = self.reduce(&p);
        let piv = (0..2 * self.n).find(|&c| r.bit(c));
        match piv {
            None => false,
            Some(c) => {
                // keep earlier rows free of the new pivot column so reduce stays one pass
                for (_, row) in self.rows.iter_mut() {
                    if row.bit(c) {
                        row.mul_assign_right(&r);
                    }
                }
                self.rows.push((c, r));
                true
            }
        }
    }

    /// `Some(true)` if p is in the group, `Some(false)` if -p is, `None` if neither.
    pub fn contains(&self, p: &PauliString) -> Option<bool> {
        let r = self.reduce(p);
        if !r.is_identity_up_to_phase() {
            return None;
        }
        match r.relative_phase() {
            0 => Some(true),
            2 => Some(false),
            _ => None,
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = &PauliString> {
        self.rows.iter().map(|(_, r)| r)
    }

    pub fn is_abelian(&self) -> bool {
        let rows: Vec<_> = self.generators().collect();
        rows.iter().enumerate().all(|(i, a)| rows[i + 1..].iter().all(|b| a.commutes(b)))
    }

    /// Same group with identical signs.
    pub fn equals(&self, other: &Self) -> bool {
        self.rank() == other.rank()
            && other.generators().all(|g| self.contains(g) == Some(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_phases() {
        let x = PauliString::parse("X").unwrap();
        let z = PauliString::parse("Z").unwrap();
        let y = PauliString::parse("Y").unwrap();
        // XZ = -iY
        let xz = x.mul(&z);
        assert!(xz.same_bits(&y));
        assert_eq!(xz.relative_phase(), 3);
        // ZX = iY
        assert_eq!(z.mul(&x).relative_phase(), 1);
        assert!(!x.commutes(&z));
        assert!(PauliString::parse("XX").unwrap().commutes(&PauliString::parse("ZZ").unwrap()));
    }

    #[test]
    fn conjugations() {
        let mut p = PauliString::parse("XI").unwrap();
        p.conj_cx(0, 1);
        assert_eq!(p.to_string(), "+XX");
        let mut p = PauliString::parse("IZ").unwrap();
        p.conj_cx(0, 1);
        assert_eq!(p.to_string(), "+ZZ");
        let mut p = PauliString::parse("X").unwrap();
        p.conj_s(0);
        assert_eq!(p.to_string(), "+Y");
        p.conj_s(0);
        assert_eq!(p.to_string(), "-X");
        let mut p = PauliString::parse("Y").unwrap();
        p.conj_h(0);
        assert_eq!(p.to_string(), "-Y");
        let mut p = PauliString::parse("XI").unwrap();
        p.conj_cz(0, 1);
        assert_eq!(p.to_string(), "+XZ");
        let mut p = PauliString::parse("YY").unwrap();
        p.conj_cz(0, 1);
        assert_eq!(p.to_string(), "+XX");
    }

    #[test]
    fn group_membership() {
        let g = StabilizerGroup::from_generators(
            2,
            &[PauliString::parse("XX").unwrap(), PauliString::parse("ZZ").unwrap()],
        );
        assert_eq!(g.contains(&PauliString::parse("-YY").unwrap()), Some(true));
        assert_eq!(g.contains(&PauliString::parse("YY").unwrap()), Some(false));
        assert_eq!(g.contains(&PauliString::parse("XI").unwrap()), None);
        assert!(g.is_abelian());
    }
}
