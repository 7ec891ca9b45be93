use std::sync::Arc;

use super::gate::Gate;
use crate::error::{Error, Result};
use crate::noise::PauliChannel;
use crate::pauli::PauliString;

/// A channel attached to a gate; it acts on the gate's targets immediately before the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyLocation {
    pub gate: usize,
    pub channel: Arc<PauliChannel>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    noisy: Vec<NoisyLocation>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new(), noisy: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn noisy_locations(&self) -> &[NoisyLocation] {
        &self.noisy
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, mut gate: Gate) -> Result<usize> {
        gate.validate(self.n)?;
        gate.noisy = false;
        self.gates.push(gate);
        Ok(self.gates.len() - 1)
    }

    /// Appends a gate carrying `channel`, which must be supported on the gate's targets.
    pub fn push_noisy(&mut self, gate: Gate, channel: Arc<PauliChannel>) -> Result<usize> {
        let i = self.push(gate)?;
        self.attach(i, channel)?;
        Ok(i)
    }

    /// Attaches a channel to an existing gate. Locations must be attached in increasing
    /// gate order.
    pub fn attach(&mut self, gate: usize, channel: Arc<PauliChannel>) -> Result<()> {
        let g = self
            .gates
            .get_mut(gate)
            .ok_or_else(|| Error::Invalid(format!("gate index {gate} out of range")))?;
        if channel.qubits() != g.targets.as_slice() {
            return Err(Error::Invalid(format!(
                "channel on {:?} attached to gate on {:?}",
                channel.qubits(),
                g.targets
            )));
        }
        if self.noisy.last().is_some_and(|l| l.gate >= gate) {
            return Err(Error::Invalid("noisy locations must be strictly increasing".into()));
        }
        g.noisy = true;
        self.noisy.push(NoisyLocation { gate, channel });
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.validate(self.n)?;
        }
        for (i, l) in self.noisy.iter().enumerate() {
            if l.gate >= self.gates.len() || (i > 0 && self.noisy[i - 1].gate >= l.gate) {
                return Err(Error::Invalid("bad noisy location list".into()));
            }
            if l.channel.qubits() != self.gates[l.gate].targets.as_slice() {
                return Err(Error::Invalid(format!("channel support mismatch at gate {}", l.gate)));
            }
        }
        let flagged = self.gates.iter().filter(|g| g.noisy).count();
        if flagged != self.noisy.len() {
            return Err(Error::Invalid("noisy flags disagree with location list".into()));
        }
        Ok(())
    }

    pub fn count_two_qubit(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit_clifford()).count()
    }

    pub fn without_noise(&self) -> Circuit {
        let gates = self.gates.iter().map(|g| Gate { noisy: false, ..g.clone() }).collect();
        Circuit { n: self.n, gates, noisy: Vec::new() }
    }

    /// Copy with Pauli gates placed immediately before noisy locations.
    ///
    /// `insertions` pairs a noisy-location index with a Pauli local to that gate's
    /// targets; identity entries are skipped.
    pub fn with_insertions(&self, insertions: &[(usize, PauliString)]) -> Result<Circuit> {
        let mut by_loc: Vec<Option<&PauliString>> = vec![None; self.noisy.len()];
        for (loc, p) in insertions {
            let slot = by_loc
                .get_mut(*loc)
                .ok_or_else(|| Error::SetMismatch(format!("location {loc} of {}", self.noisy.len())))?;
            if slot.is_some() {
                return Err(Error::SetMismatch(format!("location {loc} given twice")));
            }
            *slot = Some(p);
        }
        let mut out = Circuit::new(self.n);
        let mut next = 0;
        for (i, g) in self.gates.iter().enumerate() {
            if next < self.noisy.len() && self.noisy[next].gate == i {
                if let Some(p) = by_loc[next] {
                    if !p.is_identity() {
                        out.push(Gate::pauli(*p, g.targets.clone()))?;
                    }
                }
                out.push_noisy(g.clone(), self.noisy[next].channel.clone())?;
                next += 1;
            } else {
                out.push(g.clone())?;
            }
        }
        Ok(out)
    }

    /// Appends every gate and location of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension(format!("{} vs {} qubits", other.n, self.n)));
        }
        let offset = self.gates.len();
        self.gates.extend(other.gates.iter().cloned());
        self.noisy.extend(other.noisy.iter().map(|l| NoisyLocation { gate: l.gate + offset, channel: l.channel.clone() }));
        Ok(())
    }
}
