use num_complex::Complex;
use rand::Rng;

use super::circuit::Circuit;
use super::gate::{Gate, GateKind};
use super::observable::PauliSum;
use super::statevector::{apply_unitary, sample_counts, to_complex, StateVector};
use crate::error::{Error, Result};
use crate::noise::PauliChannel;
use crate::pauli::PauliString;
use crate::scalar::Real;

/// Dense `2^n × 2^n` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub const MAX_QUBITS: usize = 12;

    pub fn zero(n: usize) -> Self {
        Self::from_statevector(&StateVector::zero(n))
    }

    pub fn from_statevector(psi: &StateVector<T>) -> Self {
        let n = psi.n();
        assert!(n <= Self::MAX_QUBITS, "density matrices limited to {} qubits", Self::MAX_QUBITS);
        let a = psi.amplitudes();
        let d = a.len();
        let mut data = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                data.push(a[r] * a[c].conj());
            }
        }
        DensityMatrix { n, data }
    }

    /// Row-major entries; no positivity check, so signed (quasi-probability) objects fit.
    pub fn from_entries(n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if n > Self::MAX_QUBITS || data.len() != 1 << (2 * n) {
            return Err(Error::Dimension(format!("{} entries for {n} qubits", data.len())));
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim()).map(|k| self.get(k, k)).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let d = self.dim();
        (0..d).all(|r| (r..d).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        if let GateKind::Pauli(p) = &gate.kind {
            let full = p.embed(&gate.targets, self.n)?;
            self.data = self.conjugated(&full);
            return Ok(());
        }
        let u64s = gate.unitary();
        let u: Vec<Complex<T>> = u64s.iter().copied().map(to_complex).collect();
        let uc: Vec<Complex<T>> = u64s.iter().map(|z| to_complex(z.conj())).collect();
        let rows: Vec<usize> = gate.targets.iter().map(|&q| q + self.n).collect();
        apply_unitary(&mut self.data, 2 * self.n, &rows, &u);
        apply_unitary(&mut self.data, 2 * self.n, &gate.targets, &uc);
        Ok(())
    }

    /// `P ρ P` for a full-register Pauli.
    fn conjugated(&self, p: &PauliString) -> Vec<Complex<T>> {
        let d = self.dim();
        let (x, z) = (p.x_bits() as usize, p.z_bits() as usize);
        let mut out = vec![Complex::new(T::zero(), T::zero()); d * d];
        for r in 0..d {
            for c in 0..d {
                let odd = ((z & r).count_ones() + (z & c).count_ones()) & 1 == 1;
                let v = self.data[r * d + c];
                out[(r ^ x) * d + (c ^ x)] = if odd { -v } else { v };
            }
        }
        out
    }

    /// Composition over terms of `ρ ↦ (1−ε_k)ρ + ε_k P_k ρ P_k`.
    pub fn apply_pauli_channel(&mut self, channel: &PauliChannel) -> Result<()> {
        self.check_channel(channel)?;
        for t in channel.terms() {
            let p = t.pauli.embed(channel.qubits(), self.n)?;
            let e = T::of(t.rate);
            let conj = self.conjugated(&p);
            for (a, b) in self.data.iter_mut().zip(conj) {
                *a = *a * (T::one() - e) + b * e;
            }
        }
        Ok(())
    }

    /// Exact `Λ^{−m}`: composition over terms of `Γ_k[(1−mε_k)ρ − mε_k P_k ρ P_k]` with
    /// `Γ_k = 1/(1−2mε_k)`. Trace preserving, not positivity preserving.
    pub fn apply_signed_pauli_map(&mut self, channel: &PauliChannel, m: f64) -> Result<()> {
        self.check_channel(channel)?;
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Invalid(format!("mitigation fraction {m} outside [0, 1]")));
        }
        for t in channel.terms() {
            let me = m * t.rate;
            if 2.0 * me >= 1.0 {
                return Err(Error::GammaDivergence(2.0 * me));
            }
            let g = 1.0 / (1.0 - 2.0 * me);
            let (wa, wb) = (T::of(g * (1.0 - me)), T::of(-g * me));
            let p = t.pauli.embed(channel.qubits(), self.n)?;
            let conj = self.conjugated(&p);
            for (a, b) in self.data.iter_mut().zip(conj) {
                *a = *a * wa + b * wb;
            }
        }
        Ok(())
    }

    fn check_channel(&self, channel: &PauliChannel) -> Result<()> {
        for &q in channel.qubits() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        Ok(())
    }

    /// Runs the circuit; each noisy location's channel acts just before its gate.
    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::Dimension(format!("circuit on {} qubits, state on {}", circuit.n(), self.n)));
        }
        let mut noisy = circuit.noisy_locations().iter().peekable();
        for (i, g) in circuit.gates().iter().enumerate() {
            if let Some(loc) = noisy.next_if(|l| l.gate == i) {
                self.apply_pauli_channel(&loc.channel)?;
                debug_assert!(self.is_hermitian(T::of(1e-8)));
                debug_assert!((self.trace().re - T::one()).abs() < T::of(1e-6));
            }
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// `Tr(Pρ)`
    pub fn pauli_expectation(&self, p: &PauliString) -> T {
        let d = self.dim();
        let x = p.x_bits() as usize;
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..d {
            let (ph, _) = p.apply_to_basis(r as u64);
            let (re, im) = ph.as_complex();
            acc += Complex::new(T::of(re), T::of(im)) * self.data[r * d + (r ^ x)];
        }
        acc.re
    }

    pub fn expectation(&self, obs: &PauliSum) -> Result<T> {
        if obs.n() != self.n {
            return Err(Error::Dimension(format!("observable on {} qubits, state on {}", obs.n(), self.n)));
        }
        Ok(obs
            .terms()
            .iter()
            .map(|(p, w)| T::of(*w) * self.pauli_expectation(p))
            .sum())
    }

    pub fn probabilities(&self) -> Vec<T> {
        (0..self.dim()).map(|k| self.get(k, k).re).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<Vec<u64>> {
        sample_counts(&self.probabilities(), shots, rng)
    }
}
