use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::channel::{PauliChannel, PauliTerm};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::sim::{Circuit, GateKind};

fn local_paulis() -> Vec<PauliString> {
    let mut out = Vec::with_capacity(6);
    for q in 0..2 {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            out.push(PauliString::single(2, q, p));
        }
    }
    out
}

fn check_pair(pair: [usize; 2]) -> Result<()> {
    if pair[0] == pair[1] {
        Err(Error::DuplicateTarget(pair[0]))
    } else {
        Ok(())
    }
}

/// Six terms `{X, Y, Z} ⊗ {control, target}`, each with rate `ε/4`.
pub fn depolarizing_model(epsilon: f64, gate_qubits: [usize; 2]) -> Result<PauliChannel> {
    check_pair(gate_qubits)?;
    if !(0.0..2.0).contains(&epsilon) {
        return Err(Error::RateOutOfRange { rate: epsilon, why: "need 0 ≤ ε < 2" });
    }
    if epsilon == 0.0 {
        return Ok(PauliChannel::identity(gate_qubits.to_vec()));
    }
    let terms = local_paulis().into_iter().map(|p| PauliTerm::new(p, epsilon / 4.0)).collect();
    PauliChannel::new(gate_qubits.to_vec(), terms)
}

/// Per-term rate that makes three `{X, Y, Z}` terms on one qubit equal the
/// single-step depolarizing map `(1−ε)ρ + ε/3 Σ_P PρP`: `(1 − √(1 − 4ε/3))/2`.
pub fn depolarizing_term_rate(epsilon: f64) -> f64 {
    (1.0 - (1.0 - 4.0 * epsilon / 3.0).sqrt()) / 2.0
}

/// `D_ε ⊗ D_ε` on the two gate qubits, written exactly as six Pauli terms with rate
/// [`depolarizing_term_rate`]. This is the noise the simulated experiments use.
pub fn local_depolarizing(epsilon: f64, gate_qubits: [usize; 2]) -> Result<PauliChannel> {
    check_pair(gate_qubits)?;
    if !(0.0..0.75).contains(&epsilon) {
        return Err(Error::RateOutOfRange { rate: epsilon, why: "need 0 ≤ ε < 3/4" });
    }
    if epsilon == 0.0 {
        return Ok(PauliChannel::identity(gate_qubits.to_vec()));
    }
    let r = depolarizing_term_rate(epsilon);
    let terms = local_paulis().into_iter().map(|p| PauliTerm::new(p, r)).collect();
    PauliChannel::new(gate_qubits.to_vec(), terms)
}

/// Attaches `model` (a two-qubit channel template) to every CNOT/CZ of `ideal`.
pub fn build_noisy_circuit(ideal: &Circuit, model: &PauliChannel) -> Result<Circuit> {
    if model.width() != 2 {
        return Err(Error::Invalid(format!("gate model must act on 2 qubits, got {}", model.width())));
    }
    let mut out = Circuit::new(ideal.n());
    for g in ideal.gates() {
        if g.is_two_qubit_clifford() {
            out.push_noisy(g.clone(), Arc::new(model.retarget(&g.targets)?))?;
        } else {
            out.push(g.clone())?;
        }
    }
    Ok(out)
}

/// Noise model file: gate tag to channel terms, e.g.
/// `{"cx": [{"pauli": "XI", "rate": 0.0125}, ...]}`.
///
/// Tags are `cx` / `cz` for every gate of that kind, or `cx(0,1)` for one qubit pair,
/// which takes precedence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseModel(pub BTreeMap<String, Vec<PauliTerm>>);

impl NoiseModel {
    pub fn uniform(tag: &str, channel: &PauliChannel) -> Self {
        let mut m = BTreeMap::new();
        m.insert(tag.to_string(), channel.terms().to_vec());
        NoiseModel(m)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("noise model: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("noise model serializes")
    }

    pub fn channel_for(&self, kind: &GateKind, targets: &[usize]) -> Result<Option<PauliChannel>> {
        let tag = match kind {
            GateKind::Cnot => "cx",
            GateKind::Cz => "cz",
            _ => return Ok(None),
        };
        let specific = format!("{tag}({})", targets.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","));
        match self.0.get(&specific).or_else(|| self.0.get(tag)) {
            Some(terms) => Ok(Some(PauliChannel::new(targets.to_vec(), terms.clone())?)),
            None => Ok(None),
        }
    }

    pub fn apply(&self, ideal: &Circuit) -> Result<Circuit> {
        let mut out = Circuit::new(ideal.n());
        for g in ideal.gates() {
            match self.channel_for(&g.kind, &g.targets)? {
                Some(ch) => out.push_noisy(g.clone(), Arc::new(ch))?,
                None => out.push(g.clone())?,
            };
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{DensityMatrix, Gate};

    #[test]
    fn depolarizing_rates() {
        let ch = depolarizing_model(0.05, [0, 1]).unwrap();
        assert_eq!(ch.terms().len(), 6);
        assert!(ch.terms().iter().all(|t| (t.rate - 0.0125).abs() < 1e-15));
        assert_eq!(ch.qubits(), &[0, 1]);
        let ch = depolarizing_model(0.02, [3, 1]).unwrap();
        assert!(ch.terms().iter().all(|t| (t.rate - 0.005).abs() < 1e-15));
        assert!(depolarizing_model(0.0, [0, 1]).unwrap().is_identity());
        assert!(depolarizing_model(2.0, [0, 1]).is_err());
    }

    #[test]
    fn local_depolarizing_is_single_step_map() {
        let eps = 0.05;
        let ch = local_depolarizing(eps, [0, 1]).unwrap();
        let mut rho = DensityMatrix::<f64>::zero(2);
        for g in [Gate::rx(0, 0.7), Gate::h(1), Gate::cnot(1, 0), Gate::rz(0, 0.3)] {
            rho.apply_gate(&g).unwrap();
        }
        let mut a = rho.clone();
        a.apply_pauli_channel(&ch).unwrap();
        // Direct single-step depolarizing on each qubit.
        let mut b = rho;
        for q in 0..2 {
            let mut acc = b.entries().iter().map(|z| z * (1.0 - eps)).collect::<Vec<_>>();
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut c = b.clone();
                c.apply_gate(&Gate::pauli(PauliString::single(1, 0, p), vec![q])).unwrap();
                for (x, y) in acc.iter_mut().zip(c.entries()) {
                    *x += y * (eps / 3.0);
                }
            }
            b = DensityMatrix::from_entries(2, acc).unwrap();
        }
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let m = NoiseModel::uniform("cx", &depolarizing_model(0.05, [0, 1]).unwrap());
        let s = m.to_json();
        assert!(s.contains("\"pauli\": \"IX\""));
        assert_eq!(NoiseModel::from_json(&s).unwrap(), m);
        let ch = m.channel_for(&GateKind::Cnot, &[2, 3]).unwrap().unwrap();
        assert_eq!(ch.qubits(), &[2, 3]);
        assert!(m.channel_for(&GateKind::H, &[0]).unwrap().is_none());
    }
}
