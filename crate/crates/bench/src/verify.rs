//! Tolerance-checked comparison of a result record against expected values.
//!
//! ```json
//! {
//!   "command": "run",
//!   "tolerance": 0.01,
//!   "checks": {
//!     "summary.n_cut_ideal": 4.0,
//!     "summary.eta": {"min": 0.7},
//!     "summary.runs.0.steps": {"value": 69, "tol": 0},
//!     "strategy": "ideal"
//!   }
//! }
//! ```
//!
//! A bare number is compared within `tolerance` (default 1e-6); strings and booleans
//! must match exactly. Paths are dotted, with array indices as numbers.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use crate::record::ResultRecord;
use crate::runner::Command;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Expectation {
    Bounds {
        #[serde(default)]
        value: Option<f64>,
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
    },
    Exact(Value),
}

#[derive(Debug, Clone, Deserialize)]
pub struct Expected {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    pub checks: BTreeMap<String, Expectation>,
}

impl Expected {
    pub fn command(&self) -> Result<Command, String> {
        Ok(match self.command.as_deref().unwrap_or("run") {
            "run" => Command::Run,
            "landscape" => Command::Landscape,
            "cost" => Command::Cost,
            "learn" => Command::Learn,
            "distribution" => Command::Distribution,
            other => return Err(format!("unknown command {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub path: String,
    pub pass: bool,
    pub detail: String,
}

fn lookup<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(root, |v, key| match v {
        Value::Object(m) => m.get(key),
        Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

pub fn check(record: &ResultRecord, expected: &Expected) -> Vec<CheckResult> {
    let root = serde_json::to_value(record).expect("record serializes");
    let default_tol = expected.tolerance.unwrap_or(1e-6);
    expected
        .checks
        .iter()
        .map(|(path, exp)| {
            let result = |pass: bool, detail: String| CheckResult { path: path.clone(), pass, detail };
            let Some(actual) = lookup(&root, path) else {
                return result(false, "missing".into());
            };
            match exp {
                Expectation::Bounds { value, tol, min, max } if value.is_some() || min.is_some() || max.is_some() => {
                    let Some(a) = actual.as_f64() else {
                        return result(false, format!("{actual} is not a number"));
                    };
                    let mut pass = true;
                    let mut parts = Vec::new();
                    if let Some(v) = value {
                        let t = tol.unwrap_or(default_tol);
                        pass &= (a - v).abs() <= t;
                        parts.push(format!("{v} ± {t}"));
                    }
                    if let Some(lo) = min {
                        pass &= a >= *lo;
                        parts.push(format!(">= {lo}"));
                    }
                    if let Some(hi) = max {
                        pass &= a <= *hi;
                        parts.push(format!("<= {hi}"));
                    }
                    result(pass, format!("{a} (expected {})", parts.join(", ")))
                }
                Expectation::Bounds { .. } => result(false, "expectation has no value, min or max".into()),
                Expectation::Exact(Value::Number(n)) => {
                    let (Some(a), Some(v)) = (actual.as_f64(), n.as_f64()) else {
                        return result(false, format!("{actual} is not a number"));
                    };
                    result((a - v).abs() <= default_tol, format!("{a} (expected {v} ± {default_tol})"))
                }
                Expectation::Exact(v) => result(actual == v, format!("{actual} (expected {v})")),
            }
        })
        .collect()
}
