//! Outcome-distribution mitigation and distribution fidelity.

use serde::{Deserialize, Serialize};

use super::estimators::SetEvaluator;
use super::sample_set::SampleSet;
use crate::error::{Error, Result};
use crate::noise::PauliChannel;
use crate::pauli::PauliString;
use crate::qaoa::QaoaProblem;
use crate::sim::{index::walsh_hadamard, PauliSum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigatedDistribution {
    /// Corrected probabilities, indexed by outcome (qubit 0 = least significant bit).
    pub probabilities: Vec<f64>,
    /// Sum of the uncorrected estimates.
    pub raw_sum: f64,
    /// Additive correction `a = (1 − raw_sum) / 2^n` applied to every entry.
    pub correction: f64,
    pub samples: usize,
}

/// IPEC estimate of every projector `|i⟩⟨i|`, renormalised additively to sum to 1.
///
/// All projectors share the instances of `set`: the `2^n` Z-string expectations are
/// estimated on one batch of circuits and transformed to probabilities.
pub fn mitigate_distribution(
    problem: &QaoaProblem,
    params: &[f64],
    channel: &PauliChannel,
    set: &SampleSet,
) -> Result<MitigatedDistribution> {
    let circuit = problem.noisy_ansatz(params, channel)?;
    let n = circuit.n();
    let zs: Vec<PauliSum> = (0..1u64 << n)
        .map(|z| PauliSum::new(n, vec![(PauliString::from_bits(n, 0, z), 1.0)]))
        .collect::<Result<_>>()?;
    let ev = SetEvaluator::new(set.clone(), &circuit)?;
    let mut p: Vec<f64> = ev.estimate_many(&circuit, &zs)?.into_iter().map(|e| e.value).collect();
    walsh_hadamard(&mut p);
    let dim = p.len() as f64;
    p.iter_mut().for_each(|x| *x /= dim);
    let raw_sum: f64 = p.iter().sum();
    let correction = (1.0 - raw_sum) / dim;
    p.iter_mut().for_each(|x| *x += correction);
    Ok(MitigatedDistribution { probabilities: p, raw_sum, correction, samples: set.len() })
}

/// `(Σ_i √(p_i q_i))²` after clipping negative entries of `p` to zero and renormalising.
pub fn fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!("distributions of length {} and {}", p.len(), q.len())));
    }
    let clipped: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let bc: f64 = clipped.iter().zip(q).map(|(a, b)| (a / total * b.max(0.0)).sqrt()).sum();
    Ok((bc * bc).min(1.0))
}

/// Bitstring label of outcome `k`, most significant qubit first.
pub fn outcome_label(k: usize, n: usize) -> String {
    (0..n).rev().map(|q| if k >> q & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mitigation::{build_sample_set, circuit_channels, InstanceMode};
    use crate::noise::local_depolarizing;
    use crate::qaoa::{make_graph, GraphKind};
    use crate::sim::StateVector;

    #[test]
    fn fidelity_basics() {
        let p = [0.25, 0.25, 0.5, 0.0];
        assert!((fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((fidelity(&[0.5, 0.5, -0.02, 0.02], &[0.5, 0.5, 0.0, 0.0]).unwrap() - 1.0 / 1.02).abs() < 1e-12);
        assert!(fidelity(&p, &[1.0]).is_err());
        assert_eq!(outcome_label(5, 4), "0101");
    }

    #[test]
    fn noiseless_distribution_is_exact() {
        let pr = QaoaProblem::new(make_graph(&GraphKind::Ring, 4).unwrap(), 2);
        let x = [0.288, 0.356, 0.644, 0.712];
        let ch = local_depolarizing(0.0, [0, 1]).unwrap();
        let c = pr.noisy_ansatz(&x, &ch).unwrap();
        let set = build_sample_set(&circuit_channels(&c), 1.0, 10, 1, InstanceMode::ExactExpectation).unwrap();
        let d = mitigate_distribution(&pr, &x, &ch, &set).unwrap();
        let mut psi = StateVector::<f64>::zero(4);
        psi.run(&pr.ansatz(&x).unwrap()).unwrap();
        for (a, b) in d.probabilities.iter().zip(psi.probabilities()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(d.correction.abs() < 1e-14);
        assert!((d.probabilities[5] - 0.5).abs() < 5e-3);
    }

    #[test]
    fn corrected_sum_is_one() {
        let pr = QaoaProblem::new(make_graph(&GraphKind::Ring, 4).unwrap(), 2);
        let x = [0.253, 0.369, 0.635, 0.748];
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let c = pr.noisy_ansatz(&x, &ch).unwrap();
        let set = build_sample_set(&circuit_channels(&c), 1.0, 200, 4, InstanceMode::ExactExpectation).unwrap();
        let d = mitigate_distribution(&pr, &x, &ch, &set).unwrap();
        assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(d.raw_sum != 1.0);
    }
}
