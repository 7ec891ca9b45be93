//! Zero-noise extrapolation by unitary folding and a linear fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::PauliChannel;
use crate::qaoa::QaoaProblem;
use crate::sim::{Circuit, PauliSum, PauliVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    /// Requested noise scale factors, starting at 1.
    pub scale_factors: Vec<f64>,
}

impl ZneConfig {
    pub fn new(scale_factors: Vec<f64>) -> Result<Self> {
        let c = ZneConfig { scale_factors };
        c.validate()?;
        Ok(c)
    }

    /// Factors `1` and `m`.
    pub fn two_point(m: f64) -> Result<Self> {
        Self::new(vec![1.0, m])
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.scale_factors;
        if f.len() < 2 {
            return Err(Error::Invalid("ZNE needs at least two scale factors".into()));
        }
        if f[0] != 1.0 {
            return Err(Error::Invalid(format!("first scale factor must be 1, got {}", f[0])));
        }
        if f.windows(2).any(|w| !(w[1] > w[0])) || f.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid(format!("scale factors must increase strictly: {f:?}")));
        }
        Ok(())
    }
}

/// Number of extra `G†G` pairs for a circuit of `gates` noisy gates at `factor`.
fn fold_count(gates: usize, factor: f64) -> usize {
    ((factor - 1.0) * gates as f64 / 2.0).round() as usize
}

/// Noise-to-gate ratio actually realised by [`zne_fold`].
pub fn achieved_factor(gates: usize, factor: f64) -> f64 {
    if gates == 0 {
        return 1.0;
    }
    (gates + 2 * fold_count(gates, factor)) as f64 / gates as f64
}

/// Replace each noisy gate `G` by `G (G†G)^k`, with `k` spread so the total noisy gate
/// count is the integer closest to `factor` times the original. Earlier gates receive
/// the extra fold when the count does not divide evenly.
pub fn zne_fold(circuit: &Circuit, factor: f64) -> Result<Circuit> {
    if !(factor >= 1.0) || !factor.is_finite() {
        return Err(Error::Invalid(format!("fold factor must be at least 1, got {factor}")));
    }
    let locs = circuit.noisy_locations();
    let folds = fold_count(locs.len(), factor);
    let mut out = Circuit::new(circuit.n());
    let mut next = 0;
    for (i, g) in circuit.gates().iter().enumerate() {
        if next < locs.len() && locs[next].gate == i {
            let ch = &locs[next].channel;
            let k = folds / locs.len() + usize::from(next < folds % locs.len());
            out.push_noisy(g.clone(), ch.clone())?;
            for _ in 0..k {
                out.push_noisy(g.adjoint(), ch.clone())?;
                out.push_noisy(g.clone(), ch.clone())?;
            }
            next += 1;
        } else {
            out.push(g.clone())?;
        }
    }
    Ok(out)
}

/// Least-squares line through `(x, y)`; returns `(intercept, slope)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Degenerate("linear fit needs two or more paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 1e-14 * (1.0 + mx * mx) {
        return Err(Error::Degenerate("all scale factors equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneResult {
    /// Achieved scale factors.
    pub factors: Vec<f64>,
    /// One row of observable values per factor.
    pub values: Vec<Vec<f64>>,
    /// Extrapolated value per observable.
    pub intercepts: Vec<f64>,
}

/// Exact noisy expectations of each observable at every folded scale, extrapolated to 0.
pub fn zne_circuit(circuit: &Circuit, observables: &[PauliSum], config: &ZneConfig) -> Result<ZneResult> {
    config.validate()?;
    let gates = circuit.noisy_locations().len();
    let factors: Vec<f64> = config.scale_factors.iter().map(|&f| achieved_factor(gates, f)).collect();
    let mut values = Vec::with_capacity(factors.len());
    for &f in &config.scale_factors {
        let mut v = PauliVector::<f64>::zero_state(circuit.n());
        v.run(&zne_fold(circuit, f)?)?;
        values.push(observables.iter().map(|o| v.expectation(o)).collect::<Result<Vec<_>>>()?);
    }
    let intercepts = (0..observables.len())
        .map(|j| {
            let y: Vec<f64> = values.iter().map(|row| row[j]).collect();
            linear_fit(&factors, &y).map(|(a, _)| a)
        })
        .collect::<Result<_>>()?;
    Ok(ZneResult { factors, values, intercepts })
}

/// ZNE estimate of `⟨H⟩`.
pub fn zne_estimate(problem: &QaoaProblem, params: &[f64], channel: &PauliChannel, config: &ZneConfig) -> Result<f64> {
    let c = problem.noisy_ansatz(params, channel)?;
    Ok(zne_circuit(&c, &[problem.cost_observable()], config)?.intercepts[0])
}

/// Outcome distribution extrapolated entrywise from the folded circuits' distributions.
pub fn zne_distribution(problem: &QaoaProblem, params: &[f64], channel: &PauliChannel, config: &ZneConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let c = problem.noisy_ansatz(params, channel)?;
    let gates = c.noisy_locations().len();
    let factors: Vec<f64> = config.scale_factors.iter().map(|&f| achieved_factor(gates, f)).collect();
    let dists = config
        .scale_factors
        .iter()
        .map(|&f| {
            let mut v = PauliVector::<f64>::zero_state(c.n());
            v.run(&zne_fold(&c, f)?)?;
            Ok(v.probabilities())
        })
        .collect::<Result<Vec<_>>>()?;
    (0..1usize << c.n())
        .map(|k| {
            let y: Vec<f64> = dists.iter().map(|d| d[k]).collect();
            linear_fit(&factors, &y).map(|(a, _)| a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::local_depolarizing;
    use crate::qaoa::{energy, make_graph, GraphKind, Mode};
    use crate::sim::StateVector;

    fn ring4() -> QaoaProblem {
        QaoaProblem::new(make_graph(&GraphKind::Ring, 4).unwrap(), 2)
    }

    #[test]
    fn fold_counts() {
        let pr = ring4();
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let c = pr.noisy_ansatz(&[0.1, 0.5, 0.7, 0.9], &ch).unwrap();
        assert_eq!(zne_fold(&c, 1.0).unwrap(), c);
        assert_eq!(zne_fold(&c, 3.0).unwrap().noisy_locations().len(), 48);
        assert_eq!(zne_fold(&c, 1.2).unwrap().noisy_locations().len(), 20);
        assert_eq!(achieved_factor(16, 1.2), 1.25);
        assert!(zne_fold(&c, 0.5).is_err());
    }

    #[test]
    fn folding_is_noiselessly_trivial() {
        let pr = ring4();
        let c = pr.ansatz(&[0.2, 0.4, 0.6, 0.8]).unwrap();
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let noisy = crate::noise::build_noisy_circuit(&c, &ch).unwrap();
        let mut a = StateVector::<f64>::zero(4);
        a.run(&c).unwrap();
        for f in [1.4, 2.0, 3.0] {
            let mut b = StateVector::<f64>::zero(4);
            b.run(&zne_fold(&noisy, f).unwrap().without_noise()).unwrap();
            let d = a.probabilities().iter().zip(b.probabilities()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn two_point_line() {
        let (a, b) = linear_fit(&[1.0, 3.0], &[2.0, 5.0]).unwrap();
        assert!((a - (2.0 - 3.0 / 2.0)).abs() < 1e-14 && (b - 1.5).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 5.0]).is_err());
        assert!(ZneConfig::new(vec![1.0]).is_err());
        assert!(ZneConfig::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn noiseless_intercept_and_monotone_decay() {
        let pr = ring4();
        let x = [0.212, 0.359, 0.630, 0.772];
        let ideal = energy(&pr, &x, Mode::Ideal).unwrap();
        let zero = local_depolarizing(0.0, [0, 1]).unwrap();
        let cfg = ZneConfig::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!((zne_estimate(&pr, &x, &zero, &cfg).unwrap() - ideal).abs() < 1e-10);

        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let r = zne_circuit(&pr.noisy_ansatz(&x, &ch).unwrap(), &[pr.cost_observable()], &cfg).unwrap();
        let v: Vec<f64> = r.values.iter().map(|row| row[0]).collect();
        // toward −|E|/2 = −2 as the noise grows
        assert!(v[0] < v[1] && v[1] < v[2] && v[2] < -2.0);
        assert!(r.intercepts[0] < v[0] && r.intercepts[0] > ideal);
    }
}
