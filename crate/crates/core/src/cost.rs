//! Sampling-cost accounting for staged (partial) mitigation runs.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one stage of an adaptive run. Stage 0 is the unmitigated optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    /// Mitigation fraction.
    pub m: f64,
    /// Optimizer steps `s_i`.
    pub steps: usize,
    /// Circuits per evaluation `S_i` (1 for the unmitigated stage).
    pub budget: usize,
    pub gamma: f64,
    pub params: Vec<f64>,
    /// Objective value at the converged point, as estimated during the stage.
    pub objective: f64,
    pub n_cut_ideal: f64,
    /// Distance to a reference optimum, when one is known.
    pub distance: Option<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// `round(Q·Γ²)`, at least 1.
pub fn budget(q: f64, gamma: f64) -> usize {
    (q * gamma * gamma).round().max(1.0) as usize
}

/// `1 − Σ_{i ≤ cutoff} s_i S_i / (s·S)` with `full = (s, S)`.
pub fn eta(stages: &[StageTrace], full: (usize, usize), cutoff: usize) -> Result<f64> {
    let denom = full.0 as f64 * full.1 as f64;
    if denom == 0.0 {
        return Err(Error::Degenerate("full-mitigation cost is zero".into()));
    }
    let used: f64 = stages.iter().filter(|s| s.stage <= cutoff).map(|s| s.steps as f64 * s.budget as f64).sum();
    Ok(1.0 - used / denom)
}

/// `Σ_{i ≥ 1} s_i S_i / Q`.
pub fn cost_function_from_trace(stages: &[StageTrace], q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::Invalid(format!("Q must be positive, got {q}")));
    }
    Ok(stages.iter().filter(|s| s.stage >= 1).map(|s| s.steps as f64 * s.budget as f64).sum::<f64>() / q)
}

/// `Σ_{i=1}^{N} (1 + εi/2N)^{12·n_gates}`, the growth factor multiplying `A/N + B`.
fn growth(epsilon: f64, n: usize, n_gates: usize) -> f64 {
    (1..=n).map(|i| (1.0 + epsilon * i as f64 / (2.0 * n as f64)).powi(12 * n_gates as i32)).sum()
}

/// `f_{A,B}(N) = Σ_{i=1}^{N} (A/N + B)(1 + εi/2N)^{12·n_gates}`.
pub fn predict_fab(a: f64, b: f64, epsilon: f64, n: usize, n_gates: usize) -> f64 {
    (a / n as f64 + b) * growth(epsilon, n, n_gates)
}

/// Least-squares `(A, B)` for observed `f(N)` values.
pub fn fit_ab(f_values: &BTreeMap<usize, f64>, epsilon: f64, n_gates: usize) -> Result<(f64, f64)> {
    if f_values.len() < 2 || f_values.keys().any(|&n| n == 0) {
        return Err(Error::Degenerate("fit needs at least two distinct N ≥ 1".into()));
    }
    // f = A·g/N + B·g: normal equations of a two-column system
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&n, &f) in f_values {
        let g = growth(epsilon, n, n_gates);
        let (x1, x2) = (g / n as f64, g);
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * f;
        r2 += x2 * f;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-12 * s11 * s22 {
        return Err(Error::Degenerate("fit columns are collinear".into()));
    }
    Ok(((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det))
}

/// `N` in `range` minimising [`predict_fab`]; ties go to the smaller `N`.
pub fn argmin_fab(a: f64, b: f64, epsilon: f64, n_gates: usize, range: std::ops::RangeInclusive<usize>) -> usize {
    range
        .map(|n| (n, predict_fab(a, b, epsilon, n, n_gates)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

/// `Q·(1 − ε/2)^{−24np}`: full-mitigation budget of a ring QAOA under six `ε/4` terms per gate.
pub fn scalability_estimate(epsilon: f64, n: usize, p: usize, q: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&epsilon) {
        return Err(Error::RateOutOfRange { rate: epsilon, why: "intensity must lie in [0, 2)" });
    }
    Ok(q * (1.0 - epsilon / 2.0).powf(-24.0 * (n * p) as f64))
}

/// Standard deviation of the mean over `resamples` bootstrap resamples.
pub fn bootstrap_std<R: Rng + ?Sized>(samples: &[f64], resamples: usize, rng: &mut R) -> Result<f64> {
    if samples.len() < 2 || resamples < 2 {
        return Err(Error::Invalid("bootstrap needs at least two samples and two resamples".into()));
    }
    let k = samples.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..k).map(|_| samples[rng.gen_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    let mu = means.iter().sum::<f64>() / resamples as f64;
    Ok((means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt())
}

/// One cost-report row per stage of each run, keyed by the number of stages `N`.
pub fn cost_csv(runs: &BTreeMap<usize, Vec<StageTrace>>, q: f64, full: (usize, usize)) -> Result<String> {
    let mut out = String::from("N,stage,m,s_i,S_i,f_value,eta\n");
    for (n, stages) in runs {
        let f = cost_function_from_trace(stages, q)?;
        let e = eta(stages, full, usize::MAX)?;
        for s in stages {
            writeln!(out, "{n},{},{},{},{},{f},{e}", s.stage, s.m, s.steps, s.budget).expect("string write");
        }
    }
    Ok(out)
}
