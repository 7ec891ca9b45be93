//! Gate set and gate matrices.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// `exp(-iθX/2)`
    Rx(f64),
    /// `exp(-iθZ/2)`
    Rz(f64),
    H,
    X,
    /// Control is `targets[0]`.
    Cnot,
    Cz,
    /// Pauli operator over the gate targets (local qubit `j` acts on `targets[j]`).
    Pauli(PauliString),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Set when a noise channel is attached at this location.
    pub noisy: bool,
}

impl Gate {
    fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Gate { kind, targets, noisy: false }
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rx(theta), vec![q])
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rz(theta), vec![q])
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b])
    }

    /// Pauli insertion; `p` is local to `targets`.
    pub fn pauli(p: PauliString, targets: Vec<usize>) -> Self {
        Self::new(GateKind::Pauli(p), targets)
    }

    pub fn arity(&self) -> usize {
        match &self.kind {
            GateKind::Rx(_) | GateKind::Rz(_) | GateKind::H | GateKind::X => 1,
            GateKind::Cnot | GateKind::Cz => 2,
            GateKind::Pauli(p) => p.n(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.targets.len() != self.arity() {
            return Err(Error::Dimension(format!(
                "{:?} expects {} targets, got {}",
                self.kind,
                self.arity(),
                self.targets.len()
            )));
        }
        for (i, &q) in self.targets.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if self.targets[..i].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        match self.kind {
            GateKind::Rx(t) | GateKind::Rz(t) if !t.is_finite() => Err(Error::NonFiniteAngle(t)),
            _ => Ok(()),
        }
    }

    pub fn is_two_qubit_clifford(&self) -> bool {
        matches!(self.kind, GateKind::Cnot | GateKind::Cz)
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self.kind, GateKind::Rx(_) | GateKind::Rz(_))
    }

    pub fn adjoint(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            other => other.clone(),
        };
        Gate { kind, targets: self.targets.clone(), noisy: self.noisy }
    }

    /// Unitary on the local register, row-major `2^k × 2^k`; local qubit 0 is the
    /// least significant bit and maps to `targets[0]`.
    pub fn unitary(&self) -> Vec<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match &self.kind {
            GateKind::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
            }
            GateKind::Rz(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)]
            }
            GateKind::H => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]
            }
            GateKind::X => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            GateKind::Cnot => {
                // |t c⟩ with c the low bit: flips t when c = 1.
                let mut u = vec![c(0.0, 0.0); 16];
                for k in 0..4usize {
                    let out = if k & 1 == 1 { k ^ 2 } else { k };
                    u[out * 4 + k] = c(1.0, 0.0);
                }
                u
            }
            GateKind::Cz => {
                let mut u = vec![c(0.0, 0.0); 16];
                for k in 0..4usize {
                    u[k * 4 + k] = c(if k == 3 { -1.0 } else { 1.0 }, 0.0);
                }
                u
            }
            GateKind::Pauli(p) => {
                let d = 1usize << p.n();
                let mut u = vec![c(0.0, 0.0); d * d];
                for k in 0..d {
                    let (ph, out) = p.apply_to_basis(k as u64);
                    let (re, im) = ph.as_complex();
                    u[out as usize * d + k] = c(re, im);
                }
                u
            }
        }
    }

    /// Pauli-transfer matrix on the local register.
    pub fn local_ptm(&self) -> LocalPtm {
        match self.kind {
            GateKind::Cnot => cached(&CNOT_PTM, self),
            GateKind::Cz => cached(&CZ_PTM, self),
            _ => LocalPtm::from_unitary(self.arity(), &self.unitary()),
        }
    }
}

static CNOT_PTM: OnceLock<LocalPtm> = OnceLock::new();
static CZ_PTM: OnceLock<LocalPtm> = OnceLock::new();

fn cached(cell: &'static OnceLock<LocalPtm>, g: &Gate) -> LocalPtm {
    cell.get_or_init(|| LocalPtm::from_unitary(2, &g.unitary())).clone()
}

/// Sparse Pauli-transfer matrix `R[a][b] = Tr(P_a U P_b U†) / 2^k`, indexed by local
/// symplectic Pauli index. `columns[b]` lists the nonzero `(a, R[a][b])`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPtm {
    pub k: usize,
    pub columns: Vec<Vec<(usize, f64)>>,
}

impl LocalPtm {
    pub fn from_unitary(k: usize, u: &[Complex64]) -> Self {
        let d = 1usize << k;
        assert_eq!(u.len(), d * d);
        let paulis: Vec<Vec<Complex64>> = PauliString::all(k)
            .map(|p| Gate::pauli(p, (0..k).collect()).unitary())
            .collect();
        let mul = |a: &[Complex64], b: &[Complex64]| {
            let mut out = vec![Complex64::new(0.0, 0.0); d * d];
            for r in 0..d {
                for m in 0..d {
                    let x = a[r * d + m];
                    if x.norm_sqr() == 0.0 {
                        continue;
                    }
                    for c in 0..d {
                        out[r * d + c] += x * b[m * d + c];
                    }
                }
            }
            out
        };
        let udag: Vec<Complex64> = (0..d * d).map(|i| u[(i % d) * d + i / d].conj()).collect();
        let mut columns = vec![Vec::new(); d * d];
        for (b, pb) in paulis.iter().enumerate() {
            let conj = mul(&mul(u, pb), &udag);
            for (a, pa) in paulis.iter().enumerate() {
                // Tr(P_a X) = Σ_{r,m} P_a[r][m] X[m][r]
                let mut tr = Complex64::new(0.0, 0.0);
                for r in 0..d {
                    for m in 0..d {
                        tr += pa[r * d + m] * conj[m * d + r];
                    }
                }
                let v = tr.re / d as f64;
                if v.abs() > 1e-14 {
                    columns[b].push((a, v));
                }
            }
        }
        LocalPtm { k, columns }
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let d = self.columns.len();
        let mut m = vec![vec![0.0; d]; d];
        for (b, col) in self.columns.iter().enumerate() {
            for &(a, v) in col {
                m[a][b] = v;
            }
        }
        m
    }

    pub fn transpose(&self) -> LocalPtm {
        let d = self.columns.len();
        let mut columns = vec![Vec::new(); d];
        for (b, col) in self.columns.iter().enumerate() {
            for &(a, v) in col {
                columns[a].push((b, v));
            }
        }
        LocalPtm { k: self.k, columns }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_ptm_is_signed_permutation() {
        let ptm = Gate::cnot(0, 1).local_ptm();
        for col in &ptm.columns {
            assert_eq!(col.len(), 1);
            assert!((col[0].1.abs() - 1.0).abs() < 1e-12);
        }
        // X on control spreads to XX.
        let xc: PauliString = "IX".parse().unwrap();
        let xx: PauliString = "XX".parse().unwrap();
        assert_eq!(ptm.columns[xc.index() as usize][0].0, xx.index() as usize);
        // Z on target spreads to ZZ.
        let zt: PauliString = "ZI".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(ptm.columns[zt.index() as usize][0].0, zz.index() as usize);
    }

    #[test]
    fn rz_rotates_x_into_y() {
        let t = 0.3;
        let ptm = Gate::rz(0, t).local_ptm().dense();
        let (x, y) = (1, 3);
        assert!((ptm[x][x] - t.cos()).abs() < 1e-12);
        assert!((ptm[y][x] - t.sin()).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(Gate::cnot(0, 0).validate(2).is_err());
        assert!(Gate::cnot(0, 2).validate(2).is_err());
        assert!(Gate::rx(0, f64::NAN).validate(1).is_err());
        assert!(Gate::rz(1, 0.2).validate(2).is_ok());
    }
}
