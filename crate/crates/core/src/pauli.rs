//! Pauli strings in symplectic (x, z) bit form.
//!
//! Qubit `q` carries `I` when neither bit is set, `X` for x only, `Z` for z only and
//! `Y` for both. Text labels are written most-significant qubit first, so `"XI"` is
//! `X` on qubit 1 and the identity on qubit 0, matching the bitstring labels
//! (`"0101"`) used for measurement outcomes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 32;

/// Single-qubit Pauli symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Power of `i` in `{1, i, -1, -i}` stored as an exponent mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// `+1` or `-1` for real phases.
    pub fn sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn as_complex(self) -> (f64, f64) {
        match self.0 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }
}

/// An `n`-qubit Pauli operator without phase. Always Hermitian.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u64,
    z: u64,
    n: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        PauliString { x: 0, z: 0, n: n as u8 }
    }

    pub fn from_bits(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        let mask = mask(n);
        assert!(x & !mask == 0 && z & !mask == 0, "bits beyond qubit count");
        PauliString { x, z, n: n as u8 }
    }

    /// Pauli `p` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    pub fn from_ops(ops: &[Pauli]) -> Self {
        let mut s = Self::identity(ops.len());
        for (q, &p) in ops.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n(), "qubit {qubit} out of range");
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.n(), "qubit {qubit} out of range");
        let (x, z) = p.bits();
        let bit = 1u64 << qubit;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    /// Per-qubit symbols, qubit 0 first.
    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.n()).map(|q| self.get(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&q| (self.x | self.z) >> q & 1 == 1).collect()
    }

    pub fn num_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.n, other.n);
        symplectic(self.x, self.z, other.x, other.z) == 0
    }

    /// Operator product `self · other = phase · result`.
    pub fn mul(&self, other: &PauliString) -> (Phase, PauliString) {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        // With P(x, z) = i^{x·z} X^x Z^z, moving Z^{z1} past X^{x2} costs (-1)^{z1·x2}.
        let mut k: i32 = (self.x & self.z).count_ones() as i32 + (other.x & other.z).count_ones() as i32;
        k += 2 * (self.z & other.x).count_ones() as i32;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        k -= (x & z).count_ones() as i32;
        (
            Phase(k.rem_euclid(4) as u8),
            PauliString { x, z, n: self.n },
        )
    }

    /// Action on a computational basis state: `P|k⟩ = phase(k)|k ⊕ x⟩`.
    pub fn apply_to_basis(&self, k: u64) -> (Phase, u64) {
        let y = (self.x & self.z).count_ones() as u8;
        let minus = ((self.z & k).count_ones() % 2) as u8;
        (Phase((y + 2 * minus) % 4), k ^ self.x)
    }

    /// Place this string (over `targets.len()` local qubits) into an `n`-qubit register.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<PauliString> {
        if targets.len() != self.n() {
            return Err(Error::Dimension(format!(
                "pauli of width {} embedded on {} targets",
                self.n(),
                targets.len()
            )));
        }
        let mut out = PauliString::identity(n);
        for (local, &q) in targets.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            out.set(q, self.get(local));
        }
        Ok(out)
    }

    /// Restrict to `targets` (inverse of [`embed`](Self::embed) on the support).
    pub fn restrict(&self, targets: &[usize]) -> PauliString {
        let mut out = PauliString::identity(targets.len());
        for (local, &q) in targets.iter().enumerate() {
            out.set(local, self.get(q));
        }
        out
    }

    /// All `4^n` strings, in increasing symplectic index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1u64 << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    /// Symplectic index `x | z << n`.
    pub fn index(&self) -> u64 {
        self.x | self.z << self.n
    }

    pub fn from_index(n: usize, index: u64) -> PauliString {
        PauliString::from_bits(n, index & mask(n), index >> n)
    }

    pub fn label(&self) -> String {
        (0..self.n()).rev().map(|q| self.get(q).symbol()).collect()
    }
}

pub(crate) fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Symplectic form; 1 when the two Paulis anticommute.
#[inline]
pub fn symplectic(x1: u64, z1: u64, x2: u64, z2: u64) -> u32 {
    ((x1 & z2) ^ (z1 & x2)).count_ones() & 1
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({})", self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.is_empty() || chars.len() > MAX_QUBITS {
            return Err(Error::Parse(format!("bad pauli label {s:?}")));
        }
        let n = chars.len();
        let mut out = PauliString::identity(n);
        for (i, c) in chars.iter().enumerate() {
            let p = match c.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::Parse(format!("bad pauli symbol {c:?} in {s:?}"))),
            };
            out.set(n - 1 - i, p);
        }
        Ok(out)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
