//! Report documents: an aligned text table for people, JSON for machines.
//!
//! Every time value is a `Quantity` that keeps the expression it came from, so a
//! reader can re-evaluate it and get the same exact rational.

use crate::error::Result;
use crate::expr::Expr;
use crate::params::TimingParams;
use crate::rational::{fmt_decimal, fmt_q, Q};
use serde::Serialize;
use std::fmt::Write;

pub const SCHEMA_VERSION: u32 = 1;

/// "p/q ns".
pub fn time_ns(x: &Q) -> String {
    format!("{} ns", fmt_q(x))
}

/// "p/q ns (decimal ns)", or just "p ns" for integers.
pub fn time_ns_with_decimal(x: &Q) -> String {
    if x.is_integer() {
        time_ns(x)
    } else {
        format!("{} ({} ns)", time_ns(x), fmt_decimal(x, 6))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Quantity {
    pub label: String,
    pub expr: String,
    /// Distance the expression was evaluated at, when it depends on d.
    pub d: Option<usize>,
    /// Exact value, "p/q ns".
    pub value: String,
    pub decimal: String,
    #[serde(skip)]
    pub exact: Q,
}

impl Quantity {
    pub fn new(label: impl Into<String>, expr: &Expr, params: &TimingParams, d: Option<usize>) -> Result<Self> {
        let exact = expr.eval(params, d.unwrap_or(0))?;
        Ok(Quantity {
            label: label.into(),
            expr: expr.to_string(),
            d,
            value: time_ns(&exact),
            decimal: fmt_decimal(&exact, 6),
            exact,
        })
    }

    /// Plain nanoseconds; the expression is the value itself.
    pub fn ns(label: impl Into<String>, x: Q) -> Self {
        Quantity::new(label, &Expr::ns(x), &TimingParams::silicon(), None).expect("plain ns evaluates")
    }

    /// Parse the stored expression and evaluate it again.
    pub fn reevaluate(&self, params: &TimingParams) -> Result<Q> {
        Expr::parse(&self.expr)?.eval(params, self.d.unwrap_or(0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Section {
    pub title: String,
    pub quantities: Vec<Quantity>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Structured payload of the underlying module report.
    pub data: serde_json::Value,
}

impl Section {
    pub fn new(title: impl Into<String>) -> Self {
        Section { title: title.into(), quantities: Vec::new(), columns: Vec::new(), rows: Vec::new(), data: serde_json::Value::Null }
    }

    pub fn quantity(mut self, q: Quantity) -> Self {
        self.quantities.push(q);
        self
    }

    pub fn table(mut self, columns: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn data<T: Serialize>(mut self, v: &T) -> Self {
        self.data = serde_json::to_value(v).unwrap_or(serde_json::Value::Null);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamsDoc {
    pub t_loop_ns: String,
    pub t_1q_ns: String,
    pub t_2q_ns: String,
    pub t_meas_ns: String,
    pub t_int_ns: String,
    pub meas_devices: u32,
    pub slack_ns: String,
    pub seed: u64,
}

impl ParamsDoc {
    pub fn new(p: &TimingParams, seed: u64) -> Self {
        ParamsDoc {
            t_loop_ns: fmt_q(&p.t_loop),
            t_1q_ns: fmt_q(&p.t_1q),
            t_2q_ns: fmt_q(&p.t_2q),
            t_meas_ns: fmt_q(&p.t_meas),
            t_int_ns: fmt_q(&p.t_int),
            meas_devices: p.meas_devices,
            slack_ns: fmt_q(&p.slack),
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Document {
    pub schema_version: u32,
    pub command: String,
    pub params: ParamsDoc,
    pub sections: Vec<Section>,
    pub checks: Vec<Check>,
}

impl Document {
    pub fn new(command: impl Into<String>, params: &TimingParams, seed: u64) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            params: ParamsDoc::new(params, seed),
            sections: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialise")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for sec in &self.sections {
            let _ = writeln!(s, "== {} ==", sec.title);
            for q in &sec.quantities {
                let at = q.d.map(|d| format!(" (d = {d})")).unwrap_or_default();
                let dec = if q.exact.is_integer() { String::new() } else { format!(" ({} ns)", q.decimal) };
                if q.expr == q.value {
                    let _ = writeln!(s, "{}{at}: {}{dec}", q.label, q.value);
                } else {
                    let _ = writeln!(s, "{}{at}: {} = {}{dec}", q.label, q.expr, q.value);
                }
            }
            if !sec.columns.is_empty() {
                s.push_str(&align(&sec.columns, &sec.rows));
            }
            s.push('\n');
        }
        if !self.checks.is_empty() {
            let rows: Vec<Vec<String>> = self
                .checks
                .iter()
                .map(|c| vec![if c.pass { "PASS" } else { "FAIL" }.to_string(), c.name.clone(), c.detail.clone()])
                .collect();
            s.push_str(&align(&["status".into(), "check".into(), "detail".into()], &rows));
        }
        s
    }
}

/// Left-aligned columns separated by two spaces.
pub fn align(columns: &[String], rows: &[Vec<String>]) -> String {
    let width = |i: usize| {
        rows.iter().filter_map(|r| r.get(i)).map(|c| c.chars().count()).chain([columns[i].chars().count()]).max().unwrap_or(0)
    };
    let widths: Vec<usize> = (0..columns.len()).map(width).collect();
    let line = |cells: &[String]| {
        let mut l = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i + 1 == cells.len() {
                l.push_str(c);
            } else {
                let _ = write!(l, "{:<w$}  ", c, w = widths.get(i).copied().unwrap_or(0));
            }
        }
        l.trim_end().to_string() + "\n"
    };
    let mut s = line(columns);
    let _ = writeln!(s, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        s.push_str(&line(r));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::t_cyc2_expr;
    use crate::expr::Sym;
    use crate::rational::{q, qi};

    #[test]
    fn quantity_carries_its_expression() {
        let p = TimingParams::silicon();
        let c = Quantity::new("T_cyc(2)", &t_cyc2_expr(), &p, None).unwrap();
        assert_eq!(c.value, "3150 ns");
        assert_eq!(c.reevaluate(&p).unwrap(), qi(3150));
        let e = Expr::term(q(65, 32), 0, Sym::TLoop) + Expr::sym(Sym::T2q) * 2;
        let c = Quantity::new("T_CNOT(16)", &e, &p, None).unwrap();
        assert_eq!(c.value, "2025/2 ns");
        assert_eq!(c.decimal, "1012.5");
        assert_eq!(c.reevaluate(&p).unwrap(), c.exact);
    }

    #[test]
    fn text_and_json() {
        let p = TimingParams::silicon();
        let mut doc = Document::new("cycle-time", &p, 1);
        doc.sections.push(
            Section::new("cycle")
                .quantity(Quantity::new("T_cyc(2)", &t_cyc2_expr(), &p, None).unwrap())
                .table(&["n", "T"], vec![vec!["2".into(), "3150 ns".into()]]),
        );
        doc.checks.push(Check::new("x", true, ""));
        let t = doc.render_text();
        assert!(t.contains("T_cyc(2): 27/8·T_loop + 2·T_1q + 4·T_2q + T_meas = 3150 ns"), "{t}");
        let j: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(j["schema_version"], 1);
        assert_eq!(j["sections"][0]["quantities"][0]["value"], "3150 ns");
        assert!(doc.all_pass());
    }

    #[test]
    fn decimals() {
        assert_eq!(time_ns_with_decimal(&q(61, 16)), "61/16 ns (3.8125 ns)");
        assert_eq!(time_ns_with_decimal(&qi(5)), "5 ns");
    }
}
