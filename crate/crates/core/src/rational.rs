//! Exact rational time and position arithmetic.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Q = Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Reduce into [0, 1).
pub fn frac(x: Q) -> Q {
    x - x.floor()
}

/// Shortest signed rotation taking `from` onto `to` on a unit ring; a half-lap tie goes positive.
pub fn shortest_arc(from: Q, to: Q) -> Q {
    let d = frac(to - from);
    if d > q(1, 2) {
        d - qi(1)
    } else {
        d
    }
}

pub fn circ(x: Q) -> Q {
    shortest_arc(qi(0), x).abs()
}

/// Ceil to a multiple of `unit`.
pub fn ceil_to(x: Q, unit: Q) -> Q {
    (x / unit).ceil() * unit
}

/// Round half up to a multiple of `unit`.
pub fn round_to(x: Q, unit: Q) -> Q {
    (x / unit + q(1, 2)).floor() * unit
}

/// "p/q" or "p" for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering: exact when the expansion terminates within `max_places`, else rounded.
pub fn fmt_decimal(x: &Q, max_places: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let mut int = a.numer() / a.denom();
    let mut rem = a.numer() % a.denom();
    let den = *a.denom();
    let mut digits = Vec::new();
    while rem != 0 && digits.len() < max_places {
        rem *= 10;
        digits.push((rem / den) as u8);
        rem %= den;
    }
    if rem != 0 && rem * 2 >= den {
        // round half up, with carry
        let mut i = digits.len();
        loop {
            if i == 0 {
                int += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
    }
    let mut s = String::new();
    if neg && (int != 0 || !digits.is_empty()) {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if !digits.is_empty() {
        s.push('.');
        for d in digits {
            s.push((b'0' + d) as char);
        }
    }
    s
}

/// Parse "p/q", an integer, or a terminating decimal such as "0.5" or "-12.25".
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Q::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, fracpart) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && fracpart.is_empty() || !int.chars().chain(fracpart.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{fracpart}");
    let num: i64 = digits.parse().ok()?;
    let den = 10i64.checked_pow(fracpart.len() as u32)?;
    let x = Q::new(num, den);
    Some(if neg { -x } else { x })
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn lcm_denoms<'a>(xs: impl IntoIterator<Item = &'a Q>) -> i64 {
    xs.into_iter().fold(1i64, |acc, x| acc.lcm(x.denom()))
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}
