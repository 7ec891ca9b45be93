use rand::Rng;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, Plan};
use super::program::Program;
use super::sample_set::{build_sample_set, circuit_channels, InstanceMode, SampleSet};
use crate::error::{Error, Result};
use crate::noise::{PauliChannel, PauliTerm};
use crate::qaoa::QaoaProblem;
use crate::rng::substream;
use crate::sim::{sample_counts, Circuit, GateKind, PauliSum, PauliVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigatedEstimate {
    /// Estimate of `⟨H⟩`.
    pub value: f64,
    pub std_error: f64,
    pub samples_used: usize,
    pub gamma: f64,
}

/// Exact noisy `⟨H⟩` with `channel` on every CNOT.
pub fn estimate_noisy(problem: &QaoaProblem, params: &[f64], channel: &PauliChannel) -> Result<f64> {
    crate::qaoa::energy(problem, params, crate::qaoa::Mode::Noisy(channel))
}

/// `Λ^{−m} ∘ Λ` for one term is a Pauli term with rate `ε(1−m)/(1−2mε)`.
pub fn partially_mitigated_channel(channel: &PauliChannel, m: f64) -> Result<PauliChannel> {
    channel.signed_transfer_diagonal(m)?;
    let terms = channel
        .terms()
        .iter()
        .map(|t| PauliTerm::new(t.pauli, t.rate * (1.0 - m) / (1.0 - 2.0 * m * t.rate)))
        .collect();
    PauliChannel::new(channel.qubits().to_vec(), terms)
}

/// Exact `⟨H⟩` with `Λ^{−m}` applied after every channel (no sampling).
pub fn estimate_exact_mitigated(problem: &QaoaProblem, params: &[f64], channel: &PauliChannel, m: f64) -> Result<f64> {
    estimate_noisy(problem, params, &partially_mitigated_channel(channel, m)?)
}

/// A frozen sample set bound to circuits of one shape (same noisy locations and
/// channels), with its parameter-independent evaluation plan.
#[derive(Debug, Clone)]
pub struct SetEvaluator {
    set: SampleSet,
    plan: Plan,
    locations: usize,
}

impl SetEvaluator {
    pub fn new(set: SampleSet, shape: &Circuit) -> Result<Self> {
        set.check_circuit(shape)?;
        let locations = shape.noisy_locations().len();
        let plan = Plan::new(set.instances(), locations)?;
        Ok(SetEvaluator { set, plan, locations })
    }

    pub fn set(&self) -> &SampleSet {
        &self.set
    }

    /// Unsigned per-instance expectations of each observable on `circuit`.
    pub fn instance_values(&self, circuit: &Circuit, observables: &[PauliSum]) -> Result<Vec<Vec<f64>>> {
        if circuit.noisy_locations().len() != self.locations {
            return Err(Error::SetMismatch(format!(
                "set built for {} noisy locations, circuit has {}",
                self.locations,
                circuit.noisy_locations().len()
            )));
        }
        let n = circuit.n();
        for o in observables {
            if o.n() != n {
                return Err(Error::Dimension(format!("observable on {} qubits, circuit on {n}", o.n())));
            }
        }
        match self.set.mode() {
            InstanceMode::ExactExpectation => {
                let program = Program::<f64>::compile(circuit)?;
                let engine = Engine::new(&program, &self.plan)?;
                let cache = engine.forward();
                Ok(observables
                    .iter()
                    .map(|o| engine.values(&cache, &PauliVector::observable(o)))
                    .collect())
            }
            InstanceMode::Shots(shots) => shot_values(circuit, &self.set, observables, shots),
        }
    }

    pub fn estimate_many(&self, circuit: &Circuit, observables: &[PauliSum]) -> Result<Vec<MitigatedEstimate>> {
        let values = self.instance_values(circuit, observables)?;
        Ok(values.iter().map(|v| combine(&self.set, v)).collect())
    }

    pub fn estimate(&self, circuit: &Circuit, observable: &PauliSum) -> Result<MitigatedEstimate> {
        Ok(self.estimate_many(circuit, std::slice::from_ref(observable))?[0])
    }
}

/// [`SetEvaluator`] specialised to the QAOA objective of one problem and noise model.
#[derive(Debug, Clone)]
pub struct IpecEvaluator {
    problem: QaoaProblem,
    channel: PauliChannel,
    inner: SetEvaluator,
}

impl IpecEvaluator {
    pub fn new(problem: &QaoaProblem, channel: &PauliChannel, set: SampleSet) -> Result<Self> {
        let shape = problem.noisy_ansatz(&vec![0.0; problem.num_params()], channel)?;
        Ok(IpecEvaluator { problem: problem.clone(), channel: channel.clone(), inner: SetEvaluator::new(set, &shape)? })
    }

    pub fn set(&self) -> &SampleSet {
        self.inner.set()
    }

    pub fn estimate_many(&self, params: &[f64], observables: &[PauliSum]) -> Result<Vec<MitigatedEstimate>> {
        self.inner.estimate_many(&self.problem.noisy_ansatz(params, &self.channel)?, observables)
    }

    /// Mitigated `⟨H⟩`.
    pub fn estimate(&self, params: &[f64]) -> Result<MitigatedEstimate> {
        Ok(self.estimate_many(params, &[self.problem.cost_observable()])?[0])
    }
}

/// `(Γ/S) Σ_j sign_j v_j` with standard error `Γ·sd(sign_j v_j)/√S`, summed in
/// instance order.
fn combine(set: &SampleSet, values: &[f64]) -> MitigatedEstimate {
    let s = values.len();
    let signed: Vec<f64> = set.instances().iter().zip(values).map(|(i, v)| i.sign as f64 * v).collect();
    let mean = signed.iter().sum::<f64>() / s as f64;
    let var = if s > 1 { signed.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1) as f64 } else { 0.0 };
    MitigatedEstimate {
        value: set.gamma() * mean,
        std_error: set.gamma() * (var / s as f64).sqrt(),
        samples_used: s,
        gamma: set.gamma(),
    }
}

fn circuit_key(circuit: &Circuit) -> u64 {
    // FNV-1a over the gate angles: shot noise is a fixed function of the circuit.
    let angles = circuit.gates().iter().filter_map(|g| match g.kind {
        GateKind::Rx(t) | GateKind::Rz(t) => Some(t),
        _ => None,
    });
    angles.fold(0xcbf2_9ce4_8422_2325u64, |h, p| {
        p.to_bits().to_le_bytes().iter().fold(h, |h, b| (h ^ *b as u64).wrapping_mul(0x100_0000_01b3))
    })
}

fn diagonal_values(obs: &PauliSum) -> Result<Vec<f64>> {
    let n = obs.n();
    let mut out = vec![0.0; 1 << n];
    for (p, w) in obs.terms() {
        if p.x_bits() != 0 {
            return Err(Error::Invalid(format!("shot mode needs Z-diagonal observables, got {p}")));
        }
        for (k, o) in out.iter_mut().enumerate() {
            let odd = (p.z_bits() & k as u64).count_ones() % 2 == 1;
            *o += if odd { -w } else { *w };
        }
    }
    Ok(out)
}

fn shot_values(circuit: &Circuit, set: &SampleSet, observables: &[PauliSum], shots: u32) -> Result<Vec<Vec<f64>>> {
    let diag: Vec<Vec<f64>> = observables.iter().map(diagonal_values).collect::<Result<_>>()?;
    let key = circuit_key(circuit) ^ set.seed();
    let mut out = vec![Vec::with_capacity(set.len()); observables.len()];
    for (j, inst) in set.instances().iter().enumerate() {
        let c = circuit.with_insertions(&inst.resolved)?;
        let mut v = PauliVector::<f64>::zero_state(c.n());
        v.run(&c)?;
        let mut rng = substream(key, set.stream() | 0x8000, j as u64);
        let counts = sample_counts(&v.probabilities(), shots as usize, &mut rng)?;
        for (o, d) in out.iter_mut().zip(&diag) {
            o.push(counts.iter().zip(d).map(|(c, x)| *c as f64 * x).sum::<f64>() / shots as f64);
        }
    }
    Ok(out)
}

/// IPEC estimate of `⟨H⟩` for one parameter point.
pub fn ipec_estimate(problem: &QaoaProblem, params: &[f64], channel: &PauliChannel, set: &SampleSet) -> Result<MitigatedEstimate> {
    IpecEvaluator::new(problem, channel, set.clone())?.estimate(params)
}

/// PEC with a new sample set drawn from `rng` on every call.
pub fn pec_estimate_fresh<R: Rng + ?Sized>(
    problem: &QaoaProblem,
    params: &[f64],
    channel: &PauliChannel,
    size: usize,
    rng: &mut R,
) -> Result<MitigatedEstimate> {
    let circuit = problem.noisy_ansatz(params, channel)?;
    let set = build_sample_set(&circuit_channels(&circuit), 1.0, size, rng.gen(), InstanceMode::ExactExpectation)?;
    ipec_estimate(problem, params, channel, &set)
}

/// Per-instance reference evaluation (one full simulation per instance), for testing.
pub fn reference_instance_values(circuit: &Circuit, set: &SampleSet, obs: &PauliSum) -> Result<Vec<f64>> {
    set.check_circuit(circuit)?;
    set.instances()
        .iter()
        .map(|inst| {
            let mut rho = crate::sim::DensityMatrix::<f64>::zero(circuit.n());
            rho.run(&circuit.with_insertions(&inst.resolved)?)?;
            rho.expectation(obs)
        })
        .collect()
}

/// Combine reference values exactly as [`IpecEvaluator`] does.
pub fn reference_estimate(circuit: &Circuit, set: &SampleSet, obs: &PauliSum) -> Result<MitigatedEstimate> {
    Ok(combine(set, &reference_instance_values(circuit, set, obs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{enumerate_patterns, local_depolarizing};
    use crate::qaoa::{make_graph, GraphKind, Mode};
    use crate::sim::{DensityMatrix, Gate};
    use crate::PauliString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::sync::Arc;

    fn ring4() -> QaoaProblem {
        QaoaProblem::new(make_graph(&GraphKind::Ring, 4).unwrap(), 2)
    }

    fn toy() -> (Circuit, PauliSum) {
        let ch = local_depolarizing(0.2, [0, 1]).unwrap();
        let mut c = Circuit::new(2);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::rx(1, 0.7)).unwrap();
        c.push_noisy(Gate::cnot(0, 1), Arc::new(ch)).unwrap();
        c.push(Gate::rz(1, 0.4)).unwrap();
        let obs = PauliSum::new(
            2,
            vec![("ZZ".parse().unwrap(), 1.0), ("XI".parse().unwrap(), 0.5), ("YZ".parse().unwrap(), -0.3)],
        )
        .unwrap();
        (c, obs)
    }

    #[test]
    fn empty_set_is_the_noisy_estimate() {
        let pr = ring4();
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let x = [0.212, 0.359, 0.630, 0.772];
        let shape = pr.noisy_ansatz(&x, &ch).unwrap();
        let set = build_sample_set(&circuit_channels(&shape), 0.0, 5, 3, InstanceMode::ExactExpectation).unwrap();
        let e = ipec_estimate(&pr, &x, &ch, &set).unwrap();
        let noisy = estimate_noisy(&pr, &x, &ch).unwrap();
        assert!((e.value - noisy).abs() < 1e-12);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.gamma, 1.0);
        assert!((-noisy - 2.616).abs() < 2e-3);
    }

    #[test]
    fn enumeration_matches_signed_map() {
        let (c, obs) = toy();
        let chans = circuit_channels(&c);
        for m in [0.5, 1.0] {
            let pats = enumerate_patterns(&chans, m).unwrap();
            assert_eq!(pats.len(), 64);
            let (insts, probs): (Vec<_>, Vec<_>) = pats.into_iter().unzip();
            let set = SampleSet::from_patterns(&chans, m, insts, InstanceMode::ExactExpectation).unwrap();
            let ev = SetEvaluator::new(set.clone(), &c).unwrap();
            let v = &ev.instance_values(&c, std::slice::from_ref(&obs)).unwrap()[0];
            let g = set.gamma();
            let est: f64 = set.instances().iter().zip(v).zip(&probs).map(|((i, v), p)| g * p * i.sign as f64 * v).sum();

            // direct: channel then signed inverse, gate by gate
            let mut rho = DensityMatrix::<f64>::zero(2);
            for (k, gate) in c.gates().iter().enumerate() {
                if let Some(l) = c.noisy_locations().iter().find(|l| l.gate == k) {
                    rho.apply_pauli_channel(&l.channel).unwrap();
                    rho.apply_signed_pauli_map(&l.channel, m).unwrap();
                }
                rho.apply_gate(gate).unwrap();
            }
            let exact = rho.expectation(&obs).unwrap();
            assert!((est - exact).abs() < 1e-12, "m={m}: {est} vs {exact}");
            let refv = reference_instance_values(&c, &set, &obs).unwrap();
            assert!(refv.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-12));
        }
        let mut ideal = DensityMatrix::<f64>::zero(2);
        ideal.run(&c.without_noise()).unwrap();
        let pats = enumerate_patterns(&chans, 1.0).unwrap();
        let g = crate::noise::gamma(&chans, 1.0).unwrap();
        let total: f64 = pats
            .iter()
            .map(|(p, w)| {
                let mut r = DensityMatrix::<f64>::zero(2);
                r.run(&c.with_insertions(&p.resolved).unwrap()).unwrap();
                g * w * p.sign as f64 * r.expectation(&obs).unwrap()
            })
            .sum();
        assert!((total - ideal.expectation(&obs).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn engine_matches_reference_on_ring() {
        let pr = ring4();
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let x = [0.1, 0.5, 0.7, 0.9];
        let c = pr.noisy_ansatz(&x, &ch).unwrap();
        let set = build_sample_set(&circuit_channels(&c), 1.0, 60, 11, InstanceMode::ExactExpectation).unwrap();
        let a = ipec_estimate(&pr, &x, &ch, &set).unwrap();
        let b = reference_estimate(&c, &set, &pr.cost_observable()).unwrap();
        assert!((a.value - b.value).abs() < 1e-10 && (a.std_error - b.std_error).abs() < 1e-10);
        // deterministic
        assert_eq!(a.value.to_bits(), ipec_estimate(&pr, &x, &ch, &set).unwrap().value.to_bits());
    }

    #[test]
    fn partial_channel_composes() {
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let pr = ring4();
        let x = [0.212, 0.359, 0.630, 0.772];
        let full = estimate_exact_mitigated(&pr, &x, &ch, 1.0).unwrap();
        let ideal = crate::qaoa::energy(&pr, &x, Mode::Ideal).unwrap();
        assert!((full - ideal).abs() < 1e-12);
        assert_eq!(estimate_exact_mitigated(&pr, &x, &ch, 0.0).unwrap(), estimate_noisy(&pr, &x, &ch).unwrap());
        let half = estimate_exact_mitigated(&pr, &x, &ch, 0.5).unwrap();
        assert!(half < estimate_noisy(&pr, &x, &ch).unwrap() && half > ideal);
    }

    #[test]
    fn fresh_pec_mean_is_unbiased() {
        let pr = ring4();
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let x = [0.212, 0.359, 0.630, 0.772];
        let ideal = crate::qaoa::energy(&pr, &x, Mode::Ideal).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let vals: Vec<f64> =
            (0..200).map(|_| pec_estimate_fresh(&pr, &x, &ch, 50, &mut rng).unwrap().value).collect();
        let mean = vals.iter().sum::<f64>() / 200.0;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
        assert!((mean - ideal).abs() < 3.0 * sd / 200f64.sqrt(), "{mean} vs {ideal} (sd {sd})");
    }

    #[test]
    fn shot_mode_tracks_exact_mode() {
        let (c, _) = toy();
        let obs = PauliSum::new(2, vec![(PauliString::from_ops(&[crate::Pauli::Z, crate::Pauli::Z]), 1.0)]).unwrap();
        let set = build_sample_set(&circuit_channels(&c), 1.0, 40, 5, InstanceMode::ExactExpectation).unwrap();
        let exact = SetEvaluator::new(set.clone(), &c).unwrap().estimate(&c, &obs).unwrap();
        let shots = SetEvaluator::new(set.with_mode(InstanceMode::Shots(20_000)), &c).unwrap();
        let s1 = shots.estimate(&c, &obs).unwrap();
        assert!((s1.value - exact.value).abs() < 0.05, "{} vs {}", s1.value, exact.value);
        assert_eq!(s1.value, shots.estimate(&c, &obs).unwrap().value);
        let bad = PauliSum::new(2, vec![("XI".parse().unwrap(), 1.0)]).unwrap();
        assert!(shots.estimate(&c, &bad).is_err());
    }
}
