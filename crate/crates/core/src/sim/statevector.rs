use num_complex::Complex;
use rand::Rng;

use super::circuit::Circuit;
use super::gate::{Gate, GateKind};
use super::index::LocalIndexer;
use super::observable::PauliSum;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::scalar::Real;

/// Pure state on `n` qubits; amplitude `k` belongs to the basis state whose bit `q` is
/// qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    n: usize,
    amps: Vec<Complex<T>>,
}

pub(crate) fn to_complex<T: Real>(z: num_complex::Complex64) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}

impl<T: Real> StateVector<T> {
    pub const MAX_QUBITS: usize = 24;

    /// `|0…0⟩`
    pub fn zero(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS, "statevector limited to {} qubits", Self::MAX_QUBITS);
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[0] = Complex::new(T::one(), T::zero());
        StateVector { n, amps }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut s = Self::zero(n);
        s.amps[0] = Complex::new(T::zero(), T::zero());
        s.amps[k] = Complex::new(T::one(), T::zero());
        s
    }

    /// Normalises `amps`; errors on wrong length or zero norm.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::Dimension(format!("{len} amplitudes")));
        }
        let mut s = StateVector { n: len.trailing_zeros() as usize, amps };
        let norm = s.norm_sqr().sqrt();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::Invalid("zero or non-finite norm".into()));
        }
        for a in &mut s.amps {
            *a /= norm;
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        if let GateKind::Pauli(p) = &gate.kind {
            let full = p.embed(&gate.targets, self.n)?;
            self.apply_pauli(&full);
            return Ok(());
        }
        let u: Vec<Complex<T>> = gate.unitary().into_iter().map(to_complex).collect();
        apply_unitary(&mut self.amps, self.n, &gate.targets, &u);
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        let old = self.amps.clone();
        for (k, a) in old.into_iter().enumerate() {
            let (ph, out) = p.apply_to_basis(k as u64);
            let (re, im) = ph.as_complex();
            self.amps[out as usize] = a * Complex::new(T::of(re), T::of(im));
        }
    }

    /// Runs every gate of `circuit`, ignoring attached noise.
    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::Dimension(format!("circuit on {} qubits, state on {}", circuit.n(), self.n)));
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`
    pub fn pauli_expectation(&self, p: &PauliString) -> T {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, a) in self.amps.iter().enumerate() {
            let (ph, out) = p.apply_to_basis(k as u64);
            let (re, im) = ph.as_complex();
            acc += self.amps[out as usize].conj() * *a * Complex::new(T::of(re), T::of(im));
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
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<Vec<u64>> {
        sample_counts(&self.probabilities(), shots, rng)
    }
}

/// Applies a `2^k × 2^k` row-major unitary on `targets` (local qubit `j` = `targets[j]`).
pub(crate) fn apply_unitary<T: Real>(amps: &mut [Complex<T>], total_bits: usize, targets: &[usize], u: &[Complex<T>]) {
    let ix = LocalIndexer::new(total_bits, targets);
    let d = ix.offsets.len();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); d];
    for g in 0..ix.groups() {
        let b = ix.base(g);
        for (l, o) in ix.offsets.iter().enumerate() {
            buf[l] = amps[b + o];
        }
        for (r, o) in ix.offsets.iter().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for c in 0..d {
                acc += u[r * d + c] * buf[c];
            }
            amps[b + o] = acc;
        }
    }
}

/// Draws `shots` outcomes from a distribution; negative entries count as zero.
pub fn sample_counts<T: Real, R: Rng + ?Sized>(probs: &[T], shots: usize, rng: &mut R) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::Invalid("shots must be at least 1".into()));
    }
    let weights: Vec<f64> = probs.iter().map(|p| p.to_f64_lossy().max(0.0)).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights)
        .map_err(|e| Error::Invalid(format!("cannot sample distribution: {e}")))?;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[rng.sample(&dist)] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::<f64>::zero(1);
        s.apply_gate(&Gate::h(0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn cnot_on_10() {
        // "10" = qubit 1 set; control on qubit 1.
        let mut s = StateVector::<f64>::basis(2, 0b10);
        s.apply_gate(&Gate::cnot(1, 0)).unwrap();
        assert_eq!(s.probabilities(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn z_expectation_and_f32() {
        let s = StateVector::<f32>::zero(1);
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(s.pauli_expectation(&z), 1.0f32);
    }

    #[test]
    fn plus_state_sampling() {
        let mut s = StateVector::<f64>::zero(1);
        s.apply_gate(&Gate::h(0)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let counts = s.sample(100_000, &mut rng).unwrap();
        let f = counts[0] as f64 / 1e5;
        assert!((f - 0.5).abs() < 0.01);
        let mut rng2 = ChaCha20Rng::seed_from_u64(7);
        assert_eq!(counts, s.sample(100_000, &mut rng2).unwrap());
    }

    #[test]
    fn deterministic_state_single_bin() {
        let s = StateVector::<f64>::basis(3, 5);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let c = s.sample(1000, &mut rng).unwrap();
        assert_eq!(c[5], 1000);
    }

    #[test]
    fn errors() {
        let mut s = StateVector::<f64>::zero(2);
        assert!(s.apply_gate(&Gate::h(2)).is_err());
        assert!(s.apply_gate(&Gate::rz(0, f64::INFINITY)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn gates_preserve_norm(ops in proptest::collection::vec((0u8..4, 0usize..3, 0usize..3, -3.2f64..3.2), 1..30)) {
            let mut s = StateVector::<f64>::zero(3);
            for (kind, a, b, theta) in ops {
                let g = match kind {
                    0 => Gate::h(a),
                    1 => Gate::rx(a, theta),
                    2 => Gate::rz(a, theta),
                    _ if a != b => Gate::cnot(a, b),
                    _ => Gate::x(a),
                };
                s.apply_gate(&g).unwrap();
            }
            proptest::prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            proptest::prop_assert!((s.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
