//! Pauli-transfer representation of (possibly signed) states and observables.
//!
//! A state `ρ` is stored as the `4^n` real coefficients `a_Q = Tr(Qρ)`, indexed by the
//! symplectic index `x | z << n` of `Q`. Unitaries act as orthogonal matrices, Pauli
//! channels and Pauli conjugations as diagonal factors. Observables use the same layout
//! (`h_Q` with `O = Σ h_Q Q`), so `⟨O⟩ = Σ_Q h_Q a_Q` and Heisenberg evolution applies the
//! transposed transfer matrices.

use super::circuit::Circuit;
use super::density::DensityMatrix;
use super::gate::{Gate, GateKind};
use super::index::{walsh_hadamard, LocalIndexer};
use super::observable::PauliSum;
use crate::error::{Error, Result};
use crate::noise::PauliChannel;
use crate::pauli::{symplectic, PauliString};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliVector<T: Real> {
    n: usize,
    coeffs: Vec<T>,
}

/// A gate, channel or Pauli conjugation prepared for repeated application.
#[derive(Debug, Clone)]
pub struct PtmOp<T: Real> {
    ix: LocalIndexer,
    kind: OpKind<T>,
}

#[derive(Debug, Clone)]
enum OpKind<T> {
    Sparse(Vec<Vec<(usize, T)>>),
    Diag(Vec<T>),
}

fn positions(n: usize, targets: &[usize]) -> Vec<usize> {
    targets.iter().copied().chain(targets.iter().map(|&q| q + n)).collect()
}

/// `(−1)^{[P, Q] ≠ 0}` for every local Pauli `Q`: the transfer diagonal of `ρ ↦ PρP`.
pub fn conjugation_signs(p: &PauliString) -> Vec<f64> {
    let k = p.n();
    PauliString::all(k)
        .map(|q| if symplectic(p.x_bits(), p.z_bits(), q.x_bits(), q.z_bits()) == 1 { -1.0 } else { 1.0 })
        .collect()
}

impl<T: Real> PtmOp<T> {
    pub fn gate(n: usize, gate: &Gate) -> Result<Self> {
        gate.validate(n)?;
        let ix = LocalIndexer::new(2 * n, &positions(n, &gate.targets));
        let kind = match &gate.kind {
            GateKind::Pauli(p) => OpKind::Diag(conjugation_signs(p).into_iter().map(T::of).collect()),
            _ => {
                let ptm = gate.local_ptm();
                OpKind::Sparse(
                    ptm.columns
                        .iter()
                        .map(|c| c.iter().map(|&(a, v)| (a, T::of(v))).collect())
                        .collect(),
                )
            }
        };
        Ok(PtmOp { ix, kind })
    }

    /// Op from a dense local transfer matrix `m[a][b]` on `targets`.
    pub fn from_dense(n: usize, targets: &[usize], m: &[Vec<f64>]) -> Self {
        let d = 1usize << (2 * targets.len());
        assert_eq!(m.len(), d);
        let ix = LocalIndexer::new(2 * n, &positions(n, targets));
        let diagonal = (0..d).all(|a| (0..d).all(|b| a == b || m[a][b] == 0.0));
        let kind = if diagonal {
            OpKind::Diag((0..d).map(|a| T::of(m[a][a])).collect())
        } else {
            OpKind::Sparse(
                (0..d)
                    .map(|b| (0..d).filter(|&a| m[a][b] != 0.0).map(|a| (a, T::of(m[a][b]))).collect())
                    .collect(),
            )
        };
        PtmOp { ix, kind }
    }

    /// Diagonal op from per-local-Pauli factors on `targets`.
    pub fn diag(n: usize, targets: &[usize], factors: &[f64]) -> Self {
        assert_eq!(factors.len(), 1 << (2 * targets.len()));
        let ix = LocalIndexer::new(2 * n, &positions(n, targets));
        PtmOp { ix, kind: OpKind::Diag(factors.iter().map(|&f| T::of(f)).collect()) }
    }

    pub fn channel(n: usize, channel: &PauliChannel) -> Self {
        Self::diag(n, channel.qubits(), &channel.transfer_diagonal())
    }

    pub fn transpose(&self) -> Self {
        match &self.kind {
            OpKind::Diag(_) => self.clone(),
            OpKind::Sparse(columns) => {
                let mut t = vec![Vec::new(); columns.len()];
                for (b, col) in columns.iter().enumerate() {
                    for &(a, v) in col {
                        t[a].push((b, v));
                    }
                }
                PtmOp { ix: self.ix.clone(), kind: OpKind::Sparse(t) }
            }
        }
    }

    /// Folds two diagonal ops on the same targets into one; `None` otherwise.
    pub fn merge_diag(&self, other: &Self) -> Option<Self> {
        match (&self.kind, &other.kind) {
            (OpKind::Diag(a), OpKind::Diag(b)) if self.ix.offsets == other.ix.offsets => Some(PtmOp {
                ix: self.ix.clone(),
                kind: OpKind::Diag(a.iter().zip(b).map(|(x, y)| *x * *y).collect()),
            }),
            _ => None,
        }
    }
}

impl<T: Real> PauliVector<T> {
    pub const MAX_QUBITS: usize = 12;

    /// `|0…0⟩⟨0…0|`: `a_Q = 1` for every `Z`-type string.
    pub fn zero_state(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS, "Pauli vectors limited to {} qubits", Self::MAX_QUBITS);
        let mut coeffs = vec![T::zero(); 1 << (2 * n)];
        for z in 0..1usize << n {
            coeffs[z << n] = T::one();
        }
        PauliVector { n, coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS, "Pauli vectors limited to {} qubits", Self::MAX_QUBITS);
        PauliVector { n, coeffs: vec![T::zero(); 1 << (2 * n)] }
    }

    pub fn observable(obs: &PauliSum) -> Self {
        let mut v = Self::zeros(obs.n());
        for (p, w) in obs.terms() {
            v.coeffs[p.index() as usize] += T::of(*w);
        }
        v
    }

    pub fn from_density(rho: &DensityMatrix<T>) -> Self {
        let n = rho.n();
        let coeffs = PauliString::all(n).map(|p| rho.pauli_expectation(&p)).collect();
        PauliVector { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn get(&self, p: &PauliString) -> T {
        self.coeffs[p.index() as usize]
    }

    pub fn apply(&mut self, op: &PtmOp<T>) {
        let ix = &op.ix;
        match &op.kind {
            OpKind::Diag(factors) => {
                for g in 0..ix.groups() {
                    let b = ix.base(g);
                    for (o, f) in ix.offsets.iter().zip(factors) {
                        self.coeffs[b + o] *= *f;
                    }
                }
            }
            OpKind::Sparse(columns) => {
                let d = ix.offsets.len();
                let mut buf = [T::zero(); 16];
                let mut out = [T::zero(); 16];
                for g in 0..ix.groups() {
                    let b = ix.base(g);
                    for l in 0..d {
                        buf[l] = self.coeffs[b + ix.offsets[l]];
                        out[l] = T::zero();
                    }
                    for (c, col) in columns.iter().enumerate() {
                        let v = buf[c];
                        for &(a, r) in col {
                            out[a] += r * v;
                        }
                    }
                    for l in 0..d {
                        self.coeffs[b + ix.offsets[l]] = out[l];
                    }
                }
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let op = PtmOp::gate(self.n, gate)?;
        self.apply(&op);
        Ok(())
    }

    /// Heisenberg (transposed) action of `gate`.
    pub fn apply_gate_adjoint(&mut self, gate: &Gate) -> Result<()> {
        let op = PtmOp::gate(self.n, gate)?.transpose();
        self.apply(&op);
        Ok(())
    }

    pub fn apply_channel(&mut self, channel: &PauliChannel) {
        self.apply(&PtmOp::channel(self.n, channel));
    }

    /// Exact `Λ^{−m}`, diagonal `Π_k (1−2mε_k)^{−[P_k, Q] ≠ 0}`.
    pub fn apply_signed_map(&mut self, channel: &PauliChannel, m: f64) -> Result<()> {
        let f = channel.signed_transfer_diagonal(m)?;
        self.apply(&PtmOp::diag(self.n, channel.qubits(), &f));
        Ok(())
    }

    /// Runs a circuit with its noise (channel before each noisy gate).
    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::Dimension(format!("circuit on {} qubits, vector on {}", circuit.n(), self.n)));
        }
        let mut noisy = circuit.noisy_locations().iter().peekable();
        for (i, g) in circuit.gates().iter().enumerate() {
            if let Some(loc) = noisy.next_if(|l| l.gate == i) {
                self.apply_channel(&loc.channel);
            }
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a * *b).sum()
    }

    pub fn expectation(&self, obs: &PauliSum) -> Result<T> {
        if obs.n() != self.n {
            return Err(Error::Dimension(format!("observable on {} qubits, vector on {}", obs.n(), self.n)));
        }
        Ok(obs.terms().iter().map(|(p, w)| T::of(*w) * self.get(p)).sum())
    }

    /// Computational-basis probabilities `p_k = 2^{-n} Σ_z a_{Z^z} (−1)^{z·k}`.
    pub fn probabilities(&self) -> Vec<T> {
        let mut v: Vec<T> = (0..1usize << self.n).map(|z| self.coeffs[z << self.n]).collect();
        walsh_hadamard(&mut v);
        let scale = T::one() / T::of_usize(1 << self.n);
        v.iter_mut().for_each(|x| *x *= scale);
        v
    }

    pub fn scale(&mut self, s: T) {
        self.coeffs.iter_mut().for_each(|x| *x *= s);
    }

    pub fn add_scaled(&mut self, other: &Self, s: T) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b * s;
        }
    }

    /// `m[l] = Σ_{Q restricted to targets = l} a_Q b_Q`, over local symplectic indices.
    pub fn local_overlap(&self, other: &Self, targets: &[usize]) -> Vec<T> {
        let ix = LocalIndexer::new(2 * self.n, &positions(self.n, targets));
        let mut m = vec![T::zero(); ix.offsets.len()];
        for g in 0..ix.groups() {
            let b = ix.base(g);
            for (l, o) in ix.offsets.iter().enumerate() {
                m[l] += self.coeffs[b + o] * other.coeffs[b + o];
            }
        }
        m
    }
}
