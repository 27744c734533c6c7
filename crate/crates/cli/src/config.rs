//! Flat TOML parameter files. Times are nanoseconds except `slack_us`.

use pipefold::rational::{parse_q, qi, Q};
use pipefold::TimingParams;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub params: TimingParams,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { params: TimingParams::silicon(), seed: 0 }
    }
}

const REQUIRED: [&str; 4] = ["t_loop_ns", "t_1q_ns", "t_2q_ns", "t_meas_ns"];
const OPTIONAL: [&str; 4] = ["t_int_ns", "meas_devices", "slack_us", "seed"];

fn number(key: &str, v: &toml::Value) -> Result<Q, String> {
    let x = match v {
        toml::Value::Integer(i) => Some(qi(*i)),
        // Floats go through their shortest decimal rendering, so 0.5 stays 1/2.
        toml::Value::Float(f) if f.is_finite() => parse_q(&format!("{f}")),
        toml::Value::String(s) => parse_q(s),
        _ => None,
    };
    let x = x.ok_or_else(|| format!("{key}: expected a number or \"p/q\" string, got {v}"))?;
    if x < qi(0) {
        return Err(format!("{key}: must be non-negative, got {v}"));
    }
    Ok(x)
}

fn count(key: &str, v: &toml::Value) -> Result<u64, String> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(format!("{key}: expected a non-negative integer, got {v}")),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        for k in table.keys() {
            if !REQUIRED.contains(&k.as_str()) && !OPTIONAL.contains(&k.as_str()) {
                return Err(format!("unknown key {k:?}"));
            }
        }
        let get = |k: &str| -> Result<Q, String> {
            let v = table.get(k).ok_or_else(|| format!("missing key {k:?}"))?;
            number(k, v)
        };
        let mut p = TimingParams::silicon();
        p.t_loop = get("t_loop_ns")?;
        p.t_1q = get("t_1q_ns")?;
        p.t_2q = get("t_2q_ns")?;
        p.t_meas = get("t_meas_ns")?;
        p.t_int = match table.get("t_int_ns") {
            Some(v) => number("t_int_ns", v)?,
            None => p.t_loop / 2,
        };
        if let Some(v) = table.get("meas_devices") {
            let m = count("meas_devices", v)?;
            p.meas_devices = u32::try_from(m).map_err(|_| "meas_devices: too large".to_string())?;
        }
        if let Some(v) = table.get("slack_us") {
            p.slack = number("slack_us", v)? * qi(1000);
        }
        let seed = match table.get("seed") {
            Some(v) => count("seed", v)?,
            None => 0,
        };
        if p.t_loop == qi(0) {
            return Err("t_loop_ns: must be positive".into());
        }
        p.validate().map_err(|e| e.to_string())?;
        Ok(Config { params: p, seed })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
