//! Nelder–Mead simplex minimisation with per-step traces.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig<T> {
    pub max_steps: usize,
    /// Stop once `f(worst) − f(best)` over the simplex falls below this (and the
    /// simplex is within `xtol`).
    pub ftol: Option<T>,
    /// Largest coordinate distance from the best vertex allowed at termination. Guards
    /// against stopping on a simplex whose vertices tie in value but straddle the
    /// minimum. `None` disables the guard.
    pub xtol: Option<T>,
    /// Initial simplex: `x0` plus `scale` along each coordinate.
    pub scale: T,
    /// Interpret `scale` relative to each coordinate: vertex `i` moves `x0_i` to
    /// `x0_i·(1 + scale)`, or to `0.00025` when `x0_i = 0`.
    #[serde(default)]
    pub relative: bool,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        OptimizerConfig { max_steps: 100, ftol: None, xtol: Some(T::of(1e-4)), scale: T::of(0.05), relative: false }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Invalid("max_steps must be at least 1".into()));
        }
        if self.ftol.is_some_and(|t| t <= T::zero() || !t.is_finite()) {
            return Err(Error::Invalid("ftol must be positive".into()));
        }
        if self.xtol.is_some_and(|t| t <= T::zero() || !t.is_finite()) {
            return Err(Error::Invalid("xtol must be positive".into()));
        }
        if !(self.scale.is_finite() && self.scale != T::zero()) {
            return Err(Error::Invalid("simplex scale must be finite and nonzero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep<T> {
    pub step: usize,
    /// Best vertex after this step.
    pub params: Vec<T>,
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    /// Row 0 is the best vertex of the initial simplex.
    pub steps: Vec<TraceStep<T>>,
    pub converged: bool,
    pub evaluations: usize,
}

impl<T: Real> Trace<T> {
    pub fn best(&self) -> &TraceStep<T> {
        self.steps.last().expect("trace has at least the initial row")
    }

    /// Number of simplex updates performed.
    pub fn num_steps(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn to_csv(&self) -> String {
        let dim = self.steps.first().map_or(0, |s| s.params.len());
        let mut out = String::from("step,objective");
        for i in 0..dim {
            write!(out, ",x{i}").unwrap();
        }
        out.push('\n');
        for s in &self.steps {
            write!(out, "{},{}", s.step, s.objective.to_f64_lossy()).unwrap();
            for p in &s.params {
                write!(out, ",{}", p.to_f64_lossy()).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn settled<T: Real>(simplex: &[(Vec<T>, T)], config: &OptimizerConfig<T>) -> bool {
    let Some(ftol) = config.ftol else { return false };
    let best = &simplex[0];
    let worst = &simplex[simplex.len() - 1];
    if worst.1 - best.1 >= ftol {
        return false;
    }
    match config.xtol {
        None => true,
        Some(xtol) => simplex[1..]
            .iter()
            .all(|(x, _)| x.iter().zip(&best.0).all(|(a, b)| (*a - *b).abs() <= xtol)),
    }
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

/// Minimises an infallible objective. See [`try_nelder_mead`].
pub fn nelder_mead<T: Real>(mut objective: impl FnMut(&[T]) -> T, x0: &[T], config: &OptimizerConfig<T>) -> Result<Trace<T>> {
    try_nelder_mead(|x| Ok(objective(x)), x0, config)
}

/// Nelder–Mead with reflection 1, expansion 2, contraction 1/2 and shrink 1/2.
///
/// One step is one simplex update. The run stops after `max_steps` steps or when the
/// objective spread over the simplex drops below `ftol` with every vertex within `xtol`
/// of the best one; the check happens before each update.
pub fn try_nelder_mead<T: Real>(
    mut objective: impl FnMut(&[T]) -> Result<T>,
    x0: &[T],
    config: &OptimizerConfig<T>,
) -> Result<Trace<T>> {
    config.validate()?;
    if x0.is_empty() {
        return Err(Error::Invalid("empty starting point".into()));
    }
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[T]| -> Result<T> {
        evaluations += 1;
        let v = objective(x)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective { value: v.to_f64_lossy(), evaluation: evaluations });
        }
        Ok(v)
    };

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)?));
    for i in 0..dim {
        let mut x = x0.to_vec();
        if !config.relative {
            x[i] += config.scale;
        } else if x[i] != T::zero() {
            x[i] *= T::one() + config.scale;
        } else {
            x[i] = T::of(0.00025);
        }
        let f = eval(&x)?;
        simplex.push((x, f));
    }
    let order = |s: &mut Vec<(Vec<T>, T)>| s.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
    order(&mut simplex);

    let mut steps = vec![TraceStep { step: 0, params: simplex[0].0.clone(), objective: simplex[0].1 }];
    let mut converged = false;
    let (alpha, gamma, rho, sigma) = (T::of(ALPHA), T::of(GAMMA), T::of(RHO), T::of(SIGMA));

    for step in 1..=config.max_steps {
        if settled(&simplex, config) {
            converged = true;
            break;
        }
        let mut centroid = vec![T::zero(); dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += *v;
            }
        }
        let inv = T::one() / T::of_usize(dim);
        centroid.iter_mut().for_each(|c| *c *= inv);
        let along = |from: &[T], t: T| -> Vec<T> {
            centroid.iter().zip(from).map(|(c, x)| *c + t * (*x - *c)).collect()
        };

        let worst = simplex[dim].clone();
        let xr = along(&worst.0, -alpha);
        let fr = eval(&xr)?;
        let (fb, fsw) = (simplex[0].1, simplex[dim - 1].1);
        if fr < fb {
            let xe = along(&xr, gamma);
            let fe = eval(&xe)?;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < fsw {
            simplex[dim] = (xr, fr);
        } else {
            let accepted = if fr < worst.1 {
                let xc = along(&xr, rho);
                let fc = eval(&xc)?;
                (fc <= fr).then_some((xc, fc))
            } else {
                let xc = along(&worst.0, rho);
                let fc = eval(&xc)?;
                (fc < worst.1).then_some((xc, fc))
            };
            match accepted {
                Some(v) => simplex[dim] = v,
                None => {
                    let best = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        let x: Vec<T> = best.iter().zip(&v.0).map(|(b, x)| *b + sigma * (*x - *b)).collect();
                        let f = eval(&x)?;
                        *v = (x, f);
                    }
                }
            }
        }
        order(&mut simplex);
        steps.push(TraceStep { step, params: simplex[0].0.clone(), objective: simplex[0].1 });
    }
    converged = converged || settled(&simplex, config);
    Ok(Trace { steps, converged, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let cfg = OptimizerConfig { max_steps: 500, ftol: Some(1e-8), ..Default::default() };
        let t = nelder_mead(|x: &[f64]| (x[0] - 1.0).powi(2), &[0.0], &cfg).unwrap();
        assert!((t.best().params[0] - 1.0).abs() < 1e-3);
        assert!(t.converged);
    }

    #[test]
    fn two_dimensional_quadratic() {
        let cfg = OptimizerConfig { max_steps: 1000, ftol: Some(1e-12), ..Default::default() };
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 3.0 * (x[1] + 0.7).powi(2) + 0.5 * (x[0] - 0.3) * (x[1] + 0.7);
        let t = nelder_mead(f, &[1.0, 1.0], &cfg).unwrap();
        let b = &t.best().params;
        assert!((b[0] - 0.3).abs() < 1e-3 && (b[1] + 0.7).abs() < 1e-3);
    }

    #[test]
    fn works_in_f32() {
        let cfg = OptimizerConfig { max_steps: 300, ftol: Some(1e-6f32), xtol: Some(1e-3), scale: 0.05, relative: false };
        let t = nelder_mead(|x: &[f32]| (x[0] + 2.0).powi(2) + x[1].powi(2), &[0.0f32, 0.5], &cfg).unwrap();
        assert!((t.best().params[0] + 2.0).abs() < 1e-2);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let cfg = OptimizerConfig::<f64>::default();
        let r = nelder_mead(|x: &[f64]| if x[0] > 0.01 { f64::NAN } else { x[0] }, &[0.0], &cfg);
        assert!(matches!(r, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn csv_layout() {
        let cfg = OptimizerConfig { max_steps: 3, ..Default::default() };
        let t = nelder_mead(|x: &[f64]| x[0] * x[0] + x[1] * x[1], &[1.0, 1.0], &cfg).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("step,objective,x0,x1\n"));
        assert_eq!(csv.lines().count(), 1 + t.steps.len());
        assert_eq!(t.steps.len(), 4);
    }
}
