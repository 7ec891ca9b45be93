//! Noise-model learning: simulated cycle benchmarking and sparse Pauli–Lindblad rate
//! fitting.

mod nnls;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use nnls::{nnls, null_space};

use crate::error::{Error, Result};
use crate::noise::{conjugate_through, pauli_twirl, NoiseModel, PauliChannel};
use crate::pauli::PauliString;
use crate::sim::{Circuit, PauliVector};

/// Depths used by default: odd repetitions only.
pub const DEFAULT_DEPTHS: [usize; 6] = [1, 3, 5, 7, 11, 13];

/// Pauli expectation decay for one prepared basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub basis: PauliString,
    /// Image of `basis` under one cycle; equal to `basis` for Paulis the gate fixes.
    pub partner: PauliString,
    pub depths: Vec<usize>,
    pub fidelities: Vec<f64>,
}

/// Single-gate cycle with the hidden channel attached; the gate must be a noisy-capable
/// Clifford whose square is the identity up to Pauli signs.
fn cycle(gate: &Circuit, hidden: &PauliChannel) -> Result<Circuit> {
    if gate.len() != 1 {
        return Err(Error::Invalid(format!("cycle must hold exactly one gate, got {}", gate.len())));
    }
    let g = &gate.gates()[0];
    if !g.is_two_qubit_clifford() {
        return Err(Error::NonClifford(0));
    }
    let mut c = Circuit::new(gate.n());
    c.push_noisy(g.clone(), Arc::new(hidden.retarget(&g.targets)?))?;
    Ok(c)
}

fn propagate(circuit: &Circuit, p: &PauliString) -> Result<(PauliString, i8)> {
    let mut cur = *p;
    let mut sign = 1i8;
    for g in circuit.gates() {
        let local = cur.restrict(&g.targets);
        let (img, s) = conjugate_through(g, &local)?;
        let mut next = cur;
        for (j, &q) in g.targets.iter().enumerate() {
            next.set(q, img.get(j));
        }
        cur = next;
        sign *= s;
    }
    Ok((cur, sign))
}

/// For every non-identity Pauli `b`: start from `(I + b)/2^n`, apply `d` Pauli-twirled
/// noisy cycles and record the signed expectation of the propagated `b`, averaged over
/// `twirls` random twirls. Expectations are exact.
pub fn simulate_cycle_benchmark<R: Rng + ?Sized>(
    gate: &Circuit,
    hidden: &PauliChannel,
    depths: &[usize],
    twirls: usize,
    rng: &mut R,
) -> Result<Vec<DecayCurve>> {
    if twirls == 0 {
        return Err(Error::Invalid("at least one twirl is required".into()));
    }
    if depths.is_empty() || depths.contains(&0) || depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(format!("depths must be positive and increasing: {depths:?}")));
    }
    let one = cycle(gate, hidden)?;
    let n = one.n();
    let circuits: Vec<Circuit> = depths
        .iter()
        .map(|&d| {
            let mut c = Circuit::new(n);
            for _ in 0..d {
                c.extend(&one)?;
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let twirled = circuits
        .iter()
        .map(|c| pauli_twirl(c, rng, twirls))
        .collect::<Result<Vec<_>>>()?;

    PauliString::all(n)
        .filter(|b| !b.is_identity())
        .map(|b| {
            let (partner, _) = propagate(&one, &b)?;
            let (back, _) = propagate(&one, &partner)?;
            if back != b {
                return Err(Error::Invalid(format!("cycle does not square to a Pauli for basis {b}")));
            }
            let fidelities = circuits
                .iter()
                .zip(&twirled)
                .map(|(c, tw)| {
                    let (target, sign) = propagate(&c.without_noise(), &b)?;
                    let mut total = 0.0;
                    for t in tw {
                        let mut v = PauliVector::<f64>::zeros(n);
                        v.coeffs_mut()[0] = 1.0;
                        v.coeffs_mut()[b.index() as usize] = 1.0;
                        v.run(&t.circuit)?;
                        total += f64::from(sign) * v.get(&target);
                    }
                    Ok(total / tw.len() as f64)
                })
                .collect::<Result<_>>()?;
            Ok(DecayCurve { basis: b, partner, depths: depths.to_vec(), fidelities })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Per-cycle fidelity.
    pub fidelity: f64,
    /// State-preparation and measurement amplitude.
    pub amplitude: f64,
}

/// Least-squares fit of `ln F_d = ln A + d ln f`.
pub fn fit_decay(curve: &DecayCurve) -> Result<DecayFit> {
    if curve.depths.len() < 2 || curve.depths.len() != curve.fidelities.len() {
        return Err(Error::Invalid(format!("basis {}: need two or more paired depths", curve.basis)));
    }
    if let Some(bad) = curve.fidelities.iter().find(|&&f| !(f > 0.0)) {
        return Err(Error::Invalid(format!("basis {}: non-positive fidelity {bad}", curve.basis)));
    }
    let x: Vec<f64> = curve.depths.iter().map(|&d| d as f64).collect();
    let y: Vec<f64> = curve.fidelities.iter().map(|f| f.ln()).collect();
    let (ln_a, ln_f) = crate::mitigation::linear_fit(&x, &y)?;
    Ok(DecayFit { fidelity: ln_f.exp().min(1.0), amplitude: ln_a.exp() })
}

/// Measured per-cycle fidelity of a basis pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisFidelity {
    pub basis: PauliString,
    pub partner: PauliString,
    pub fidelity: f64,
}

/// Fit every curve; curves whose fit fails are returned in the second list.
pub fn pauli_fidelities(curves: &[DecayCurve]) -> (Vec<BasisFidelity>, Vec<(PauliString, Error)>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for c in curves {
        match fit_decay(c) {
            Ok(f) => ok.push(BasisFidelity { basis: c.basis, partner: c.partner, fidelity: f.fidelity }),
            Err(e) => failed.push((c.basis, e)),
        }
    }
    (ok, failed)
}

/// Learned sparse Pauli–Lindblad model on a fixed generator set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    pub support: Vec<PauliString>,
    /// Lindblad rates `λ_k ≥ 0`.
    pub rates: Vec<f64>,
}

impl LearnedModel {
    /// Pauli error rates `ε_k = (1 − e^{−2λ_k})/2`.
    pub fn epsilons(&self) -> Vec<f64> {
        self.rates.iter().map(|l| (1.0 - (-2.0 * l).exp()) / 2.0).collect()
    }

    /// The channel on `qubits` (the support's local indices map onto them in order).
    pub fn channel(&self, qubits: &[usize]) -> Result<PauliChannel> {
        let gens: Vec<(PauliString, f64)> = self.support.iter().copied().zip(self.rates.iter().copied()).collect();
        PauliChannel::from_lindblad(qubits.to_vec(), &gens)
    }

    /// Noise-model file content with this channel on every `tag` gate.
    pub fn to_noise_model(&self, tag: &str) -> Result<NoiseModel> {
        let width = self.support.first().map_or(2, |p| p.n());
        Ok(NoiseModel::uniform(tag, &self.channel(&(0..width).collect::<Vec<_>>())?))
    }
}

/// Non-negative least squares for `M·(2λ) = −ln f`, where row `b` of `M` averages the
/// anticommutation indicators of `b` and its cycle partner with each generator.
///
/// Fails with [`Error::RankDeficient`] (carrying the null space) when the measured
/// bases do not determine every rate.
pub fn fit_lindblad_rates(fidelities: &[BasisFidelity], support: &[PauliString]) -> Result<LearnedModel> {
    if fidelities.is_empty() || support.is_empty() {
        return Err(Error::Invalid("need at least one fidelity and one generator".into()));
    }
    let rows = fidelities.len();
    let cols = support.len();
    let anti = |a: &PauliString, k: &PauliString| -> Result<f64> {
        if a.n() != k.n() {
            return Err(Error::Dimension(format!("basis {a} vs generator {k}")));
        }
        Ok(if a.commutes_with(k) { 0.0 } else { 1.0 })
    };
    let mut m = DMatrix::<f64>::zeros(rows, cols);
    let mut y = DVector::<f64>::zeros(rows);
    for (i, bf) in fidelities.iter().enumerate() {
        if !(bf.fidelity > 0.0 && bf.fidelity <= 1.0 + 1e-12) {
            return Err(Error::Invalid(format!("fidelity of {} out of (0, 1]: {}", bf.basis, bf.fidelity)));
        }
        for (j, k) in support.iter().enumerate() {
            m[(i, j)] = (anti(&bf.basis, k)? + anti(&bf.partner, k)?) / 2.0;
        }
        y[i] = -bf.fidelity.min(1.0).ln();
    }
    let (rank, null) = null_space(&m);
    if rank < cols {
        return Err(Error::RankDeficient { rank, cols, null_space: null });
    }
    let two_lambda = nnls(&m, &y)?;
    Ok(LearnedModel { support: support.to_vec(), rates: two_lambda.iter().map(|v| v / 2.0).collect() })
}
