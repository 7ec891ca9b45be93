use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{symplectic, PauliString};

/// One generator of a Pauli channel: `ρ ↦ (1−ε)ρ + ε PρP`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub pauli: PauliString,
    pub rate: f64,
}

impl PauliTerm {
    pub fn new(pauli: PauliString, rate: f64) -> Self {
        PauliTerm { pauli, rate }
    }

    /// `ω = 1 − ε`
    pub fn omega(&self) -> f64 {
        1.0 - self.rate
    }

    /// Lindblad rate `λ` with `ω = (1 + e^{−2λ})/2`.
    pub fn lambda(&self) -> f64 {
        -0.5 * (1.0 - 2.0 * self.rate).ln()
    }
}

/// Composition of single-Pauli channels on `qubits`. Term Paulis are local: local qubit
/// `j` is `qubits[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    qubits: Vec<usize>,
    terms: Vec<PauliTerm>,
}

impl PauliChannel {
    pub fn new(qubits: Vec<usize>, terms: Vec<PauliTerm>) -> Result<Self> {
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(Error::DuplicateTarget(*q));
            }
        }
        for t in &terms {
            if t.pauli.n() != qubits.len() {
                return Err(Error::Dimension(format!(
                    "term {} on a {}-qubit channel",
                    t.pauli,
                    qubits.len()
                )));
            }
            if !(0.0..0.5).contains(&t.rate) {
                return Err(Error::RateOutOfRange { rate: t.rate, why: "need 0 ≤ ε < 1/2" });
            }
        }
        Ok(PauliChannel { qubits, terms })
    }

    pub fn identity(qubits: Vec<usize>) -> Self {
        PauliChannel { qubits, terms: Vec::new() }
    }

    /// Builds a channel from Lindblad rates, `ε = (1 − e^{−2λ})/2`.
    pub fn from_lindblad(qubits: Vec<usize>, generators: &[(PauliString, f64)]) -> Result<Self> {
        let terms = generators
            .iter()
            .map(|&(p, l)| {
                if l < 0.0 || !l.is_finite() {
                    return Err(Error::RateOutOfRange { rate: l, why: "Lindblad rate must be finite and ≥ 0" });
                }
                Ok(PauliTerm::new(p, (1.0 - (-2.0 * l).exp()) / 2.0))
            })
            .collect::<Result<_>>()?;
        Self::new(qubits, terms)
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_identity(&self) -> bool {
        self.terms.iter().all(|t| t.rate == 0.0 || t.pauli.is_identity())
    }

    /// Same terms on different qubits.
    pub fn retarget(&self, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != self.qubits.len() {
            return Err(Error::Dimension(format!(
                "{}-qubit channel retargeted to {:?}",
                self.qubits.len(),
                qubits
            )));
        }
        Self::new(qubits.to_vec(), self.terms.clone())
    }

    /// Pauli-transfer diagonal over local Paulis: `Π_k (1−2ε_k)^{[P_k, Q] ≠ 0}`.
    pub fn transfer_diagonal(&self) -> Vec<f64> {
        self.diagonal(|e| 1.0 - 2.0 * e)
    }

    /// Transfer diagonal of the exact inverse power `Λ^{−m}`.
    pub fn signed_transfer_diagonal(&self, m: f64) -> Result<Vec<f64>> {
        check_fraction(m)?;
        for t in &self.terms {
            if 2.0 * m * t.rate >= 1.0 {
                return Err(Error::GammaDivergence(2.0 * m * t.rate));
            }
        }
        Ok(self.diagonal(|e| 1.0 / (1.0 - 2.0 * m * e)))
    }

    fn diagonal(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        PauliString::all(self.width())
            .map(|q| {
                self.terms
                    .iter()
                    .filter(|t| symplectic(t.pauli.x_bits(), t.pauli.z_bits(), q.x_bits(), q.z_bits()) == 1)
                    .map(|t| f(t.rate))
                    .product()
            })
            .collect()
    }

    /// `Π_k (1 − 2mε_k)^{−1}`.
    pub fn gamma(&self, m: f64) -> Result<f64> {
        gamma(std::slice::from_ref(self), m)
    }
}

pub(crate) fn check_fraction(m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("mitigation fraction {m} outside [0, 1]")))
    }
}

/// Amplification factor of `Λ^{−m}` over a list of channels: `Π (1 − 2mε_k)^{−1}`.
pub fn gamma(channels: &[PauliChannel], m: f64) -> Result<f64> {
    check_fraction(m)?;
    let mut log = 0.0;
    for t in channels.iter().flat_map(|c| c.terms()) {
        let x = 2.0 * m * t.rate;
        if x >= 1.0 {
            return Err(Error::GammaDivergence(x));
        }
        log -= (1.0 - x).ln();
    }
    Ok(log.exp())
}
