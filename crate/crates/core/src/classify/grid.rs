//! Hyperparameter values, points and grids.
//!
//! A grid file is TOML with one key per hyperparameter and an array of
//! candidate values (a scalar is a one-value axis):
//!
//! ```toml
//! C = [0.1, 1.0, 10.0]
//! max_iter = [100]
//! solver = ["lbfgs", "newton-cg"]
//! ```
//!
//! Keys may carry a `clf__` prefix, which is stripped.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl ParamValue {
    fn rank(&self) -> u8 {
        match self {
            ParamValue::Bool(_) => 0,
            ParamValue::Int(_) | ParamValue::Float(_) => 1,
            ParamValue::Str(_) => 2,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            ParamValue::Int(i) => Some(i as f64),
            ParamValue::Float(x) => Some(x),
            _ => None,
        }
    }
}

impl Eq for ParamValue {}

impl Ord for ParamValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use ParamValue::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a.cmp(b),
            (Str(a), Str(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (a, b) if a.rank() == 1 && b.rank() == 1 => {
                a.as_f64().unwrap().total_cmp(&b.as_f64().unwrap())
            }
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}

impl PartialOrd for ParamValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{}", crate::format::sig9(*x)),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}

fn value_from_toml(key: &str, v: &toml::Value) -> Result<ParamValue> {
    Ok(match v {
        toml::Value::Boolean(b) => ParamValue::Bool(*b),
        toml::Value::Integer(i) => ParamValue::Int(*i),
        toml::Value::Float(x) => ParamValue::Float(*x),
        toml::Value::String(s) => ParamValue::Str(s.clone()),
        other => {
            return Err(Error::Config(format!(
                "grid key `{key}`: unsupported value {other}"
            )))
        }
    })
}

fn normalize_key(k: &str) -> String {
    k.strip_prefix("clf__").unwrap_or(k).to_string()
}

/// One grid point. Keys are kept sorted, so comparing two points compares
/// their value tuples in key order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Params(pub BTreeMap<String, ParamValue>);

impl Params {
    pub fn new() -> Params {
        Params::default()
    }

    pub fn with(mut self, key: &str, value: ParamValue) -> Params {
        self.0.insert(normalize_key(key), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    /// Errors on any key outside `allowed`.
    pub fn check_keys(&self, kind: &str, allowed: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown {kind} hyperparameter `{k}` (expected one of {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::InvalidInput(format!("`{key}` must be numeric, got {v}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(Error::InvalidInput(format!(
                "`{key}` must be a non-negative integer, got {v}"
            ))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        match self.get(key) {
            None => Ok(default),
            Some(ParamValue::Str(s)) => Ok(s),
            Some(v) => Err(Error::InvalidInput(format!("`{key}` must be a string, got {v}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(ParamValue::Bool(b)) => Ok(*b),
            Some(v) => Err(Error::InvalidInput(format!("`{key}` must be a boolean, got {v}"))),
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Grid {
    pub axes: BTreeMap<String, Vec<ParamValue>>,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Grid> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("grid: {e}")))?;
        let mut axes = BTreeMap::new();
        for (k, v) in &table {
            let values = match v {
                toml::Value::Array(items) => items
                    .iter()
                    .map(|x| value_from_toml(k, x))
                    .collect::<Result<Vec<_>>>()?,
                scalar => vec![value_from_toml(k, scalar)?],
            };
            if values.is_empty() {
                return Err(Error::Config(format!("grid key `{k}` has no values")));
            }
            axes.insert(normalize_key(k), values);
        }
        Ok(Grid { axes })
    }

    pub fn load(path: &Path) -> Result<Grid> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Grid::parse(&text)
    }

    /// Cartesian product, first key varying slowest.
    pub fn points(&self) -> Vec<Params> {
        let mut out = vec![Params::new()];
        for (k, values) in &self.axes {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for p in &out {
                for v in values {
                    next.push(p.clone().with(k, v.clone()));
                }
            }
            out = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_expands() {
        let g = Grid::parse("clf__C = [0.1, 1]\nsolver = [\"lbfgs\", \"gd\"]\nmax_iter = 50\n").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].to_string(), "C=0.1 max_iter=50 solver=lbfgs");
        assert_eq!(pts[3].f64_or("C", 0.0).unwrap(), 1.0);
    }

    #[test]
    fn params_order_lexicographically() {
        let a = Params::new().with("C", ParamValue::Float(0.5)).with("solver", ParamValue::Str("z".into()));
        let b = Params::new().with("C", ParamValue::Int(1)).with("solver", ParamValue::Str("a".into()));
        assert!(a < b);
    }
}
