//! Symbolic time expressions: linear in the hardware symbols, polynomial in d.

use crate::error::{Error, Result};
use crate::params::TimingParams;
use crate::rational::{fmt_q, parse_q, qi, Q};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sym {
    /// Effective cycle time with n qubits per loop.
    TCycStar(u32),
    /// Cycle time of the standard architecture.
    TCyc,
    TLoop,
    T1q,
    T2q,
    TMeas,
    TInt,
    /// Plain nanoseconds.
    Ns,
}

impl Sym {
    pub fn label(&self) -> String {
        match self {
            Sym::TCycStar(n) => format!("T_cyc*({n})"),
            Sym::TCyc => "T_cyc".into(),
            Sym::TLoop => "T_loop".into(),
            Sym::T1q => "T_1q".into(),
            Sym::T2q => "T_2q".into(),
            Sym::TMeas => "T_meas".into(),
            Sym::TInt => "T_int".into(),
            Sym::Ns => "ns".into(),
        }
    }

    pub fn value(&self, p: &TimingParams) -> Result<Q> {
        Ok(match self {
            Sym::TCycStar(n) => crate::costs::effective_cycle_time(*n as usize, p, None)?,
            Sym::TCyc => p.t_cyc_std,
            Sym::TLoop => p.t_loop,
            Sym::T1q => p.t_1q,
            Sym::T2q => p.t_2q,
            Sym::TMeas => p.t_meas,
            Sym::TInt => p.t_int,
            Sym::Ns => Q::one(),
        })
    }
}

/// Sum of coeff · d^k · symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expr {
    terms: BTreeMap<(Sym, u8), Q>,
}

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn sym(s: Sym) -> Self {
        Self::term(Q::one(), 0, s)
    }

    pub fn ns(x: Q) -> Self {
        Self::term(x, 0, Sym::Ns)
    }

    pub fn term(c: Q, dpow: u8, s: Sym) -> Self {
        let mut e = Self::zero();
        e.push(c, dpow, s);
        e
    }

    fn push(&mut self, c: Q, dpow: u8, s: Sym) {
        let slot = self.terms.entry((s, dpow)).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(s, dpow));
        }
    }

    /// Multiply by d.
    pub fn times_d(&self) -> Self {
        let mut e = Self::zero();
        for (&(s, k), &c) in &self.terms {
            e.push(c, k + 1, s);
        }
        e
    }

    pub fn coefficient(&self, s: Sym, dpow: u8) -> Q {
        self.terms.get(&(s, dpow)).copied().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Sym, u8, Q)> + '_ {
        self.terms.iter().map(|(&(s, k), &c)| (s, k, c))
    }

    /// Keep only terms whose symbol passes `keep`.
    pub fn filter(&self, keep: impl Fn(Sym) -> bool) -> Self {
        let mut e = Self::zero();
        for (s, k, c) in self.terms() {
            if keep(s) {
                e.push(c, k, s);
            }
        }
        e
    }

    pub fn eval(&self, p: &TimingParams, d: usize) -> Result<Q> {
        let mut total = Q::zero();
        for (s, k, c) in self.terms() {
            total += c * qi(d as i64).pow(k as i32) * s.value(p)?;
        }
        Ok(total)
    }
}

impl Expr {
    /// Inverse of `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("cannot parse expression {text:?}"));
        let t = text.trim();
        if t == "0" {
            return Ok(Expr::zero());
        }
        // Split on " + " / " - " between terms; a leading "-" negates the first.
        let mut pieces: Vec<(bool, &str)> = Vec::new();
        let (mut neg, mut rest) = match t.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, t),
        };
        loop {
            let plus = rest.find(" + ");
            let minus = rest.find(" - ");
            let cut = match (plus, minus) {
                (Some(a), Some(b)) => Some((a.min(b), a > b)),
                (Some(a), None) => Some((a, false)),
                (None, Some(b)) => Some((b, true)),
                (None, None) => None,
            };
            match cut {
                Some((i, next_neg)) => {
                    pieces.push((neg, &rest[..i]));
                    rest = &rest[i + 3..];
                    neg = next_neg;
                }
                None => {
                    pieces.push((neg, rest));
                    break;
                }
            }
        }
        let mut e = Expr::zero();
        for (neg, piece) in pieces {
            let (body, ns) = match piece.strip_suffix(" ns") {
                Some(b) => (b, true),
                None => (piece, false),
            };
            let mut coef = Q::one();
            let mut dpow = 0u8;
            let mut sym = if ns { Some(Sym::Ns) } else { None };
            for (k, part) in body.split('·').enumerate() {
                if part == "d" {
                    dpow = 1;
                } else if let Some(p) = part.strip_prefix("d^") {
                    dpow = p.parse().map_err(|_| bad())?;
                } else if let Some(s) = Sym::from_label(part) {
                    if sym.is_some() {
                        return Err(bad());
                    }
                    sym = Some(s);
                } else if k == 0 {
                    coef = parse_q(part).ok_or_else(bad)?;
                } else {
                    return Err(bad());
                }
            }
            let s = sym.ok_or_else(bad)?;
            e.push(if neg { -coef } else { coef }, dpow, s);
        }
        Ok(e)
    }
}


impl Sym {
    fn from_label(s: &str) -> Option<Sym> {
        Some(match s {
            "T_cyc" => Sym::TCyc,
            "T_loop" => Sym::TLoop,
            "T_1q" => Sym::T1q,
            "T_2q" => Sym::T2q,
            "T_meas" => Sym::TMeas,
            "T_int" => Sym::TInt,
            _ => {
                let n = s.strip_prefix("T_cyc*(")?.strip_suffix(')')?;
                Sym::TCycStar(n.parse().ok()?)
            }
        })
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        for (s, k, c) in rhs.terms() {
            self.push(c, k, s);
        }
        self
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + rhs * -Q::one()
    }
}

impl Mul<Q> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Q) -> Expr {
        let mut e = Expr::zero();
        for (s, k, c) in self.terms() {
            e.push(c * rhs, k, s);
        }
        e
    }
}

impl Mul<i64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: i64) -> Expr {
        self * qi(rhs)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest power of d first, then symbol order.
        let mut items: Vec<(Sym, u8, Q)> = self.terms().collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (i, (s, k, c)) in items.into_iter().enumerate() {
            let neg = c < Q::zero();
            let a = if neg { -c } else { c };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let dpart = match k {
                0 => String::new(),
                1 => "d".into(),
                _ => format!("d^{k}"),
            };
            if s == Sym::Ns {
                write!(f, "{}{} ns", fmt_q(&a), if dpart.is_empty() { String::new() } else { format!("·{dpart}") })?;
                continue;
            }
            let mut parts = Vec::new();
            if !a.is_one() {
                parts.push(fmt_q(&a));
            }
            if !dpart.is_empty() {
                parts.push(dpart);
            }
            parts.push(s.label());
            write!(f, "{}", parts.join("·"))?;
        }
        Ok(())
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn renders_cycle_formula() {
        let e = Expr::term(q(27, 8), 0, Sym::TLoop) + Expr::sym(Sym::T1q) * 2 + Expr::sym(Sym::T2q) * 4 + Expr::sym(Sym::TMeas);
        assert_eq!(e.to_string(), "27/8·T_loop + 2·T_1q + 4·T_2q + T_meas");
        assert_eq!(e.eval(&TimingParams::silicon(), 0).unwrap(), qi(3150));
    }

    #[test]
    fn d_terms_and_cancellation() {
        let e = Expr::sym(Sym::TCyc).times_d() * 3 + Expr::ns(qi(5));
        assert_eq!(e.to_string(), "3·d·T_cyc + 5 ns");
        assert_eq!(e.eval(&TimingParams::silicon(), 25).unwrap(), qi(225005));
        assert_eq!((e.clone() - e).to_string(), "0");
    }

    #[test]
    fn parse_inverts_display() {
        for text in [
            "27/8·T_loop + 2·T_1q + 4·T_2q + T_meas",
            "3·d·T_cyc + 5 ns",
            "-1/2·d^2·T_cyc*(16) + 3/2·d ns - 7/4·T_loop",
            "0",
            "T_int",
        ] {
            assert_eq!(Expr::parse(text).unwrap().to_string(), text);
        }
        assert!(Expr::parse("3·T_bogus").is_err());
        assert!(Expr::parse("1/0·T_loop").is_err());
    }
}
