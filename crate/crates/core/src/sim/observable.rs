use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Real-weighted sum of Pauli strings, `Σ_j w_j P_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(PauliString, f64)>,
}

impl PauliSum {
    pub fn new(n: usize, terms: Vec<(PauliString, f64)>) -> Result<Self> {
        for (p, w) in &terms {
            if p.n() != n {
                return Err(Error::Dimension(format!("term {p} in {n}-qubit observable")));
            }
            if !w.is_finite() {
                return Err(Error::Invalid(format!("non-finite weight on {p}")));
            }
        }
        Ok(PauliSum { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    /// Projector `|k⟩⟨k| = 2^{-n} Σ_z (−1)^{z·k} Z^z`.
    pub fn projector(n: usize, k: usize) -> Self {
        let scale = 1.0 / (1u64 << n) as f64;
        let terms = (0..1u64 << n)
            .map(|z| {
                let sign = if (z & k as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                (PauliString::from_bits(n, 0, z), sign * scale)
            })
            .collect();
        PauliSum { n, terms }
    }
}
