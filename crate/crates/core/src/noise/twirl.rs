use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::sim::{Circuit, Gate};

/// A twirled copy of a circuit; `sign` is the product of the Clifford-conjugation signs,
/// i.e. the circuit's unitary equals `sign` times the original.
#[derive(Debug, Clone, PartialEq)]
pub struct TwirledCircuit {
    pub circuit: Circuit,
    pub sign: i8,
}

/// `G P G† = sign · P'` for a Clifford gate; returns `(P', sign)`.
pub fn conjugate_through(gate: &Gate, p: &PauliString) -> Result<(PauliString, i8)> {
    if !gate.is_clifford() {
        return Err(Error::Invalid(format!("{:?} is not Clifford", gate.kind)));
    }
    let ptm = gate.local_ptm();
    let col = &ptm.columns[p.index() as usize];
    debug_assert_eq!(col.len(), 1);
    let (a, v) = col[0];
    Ok((PauliString::from_index(p.n(), a as u64), if v > 0.0 { 1 } else { -1 }))
}

/// Draws `randomizations` twirls. Each noisy gate `G` becomes `P_post · G · P_pre` with
/// `P_pre` uniform over the Paulis on its targets and `P_post = G P_pre G†`; identity
/// Paulis are not emitted, so an all-identity draw returns the circuit unchanged.
pub fn pauli_twirl<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R, randomizations: usize) -> Result<Vec<TwirledCircuit>> {
    for l in circuit.noisy_locations() {
        if !circuit.gates()[l.gate].is_two_qubit_clifford() {
            return Err(Error::NonClifford(l.gate));
        }
    }
    (0..randomizations)
        .map(|_| {
            let draws: Vec<PauliString> = circuit
                .noisy_locations()
                .iter()
                .map(|l| {
                    let k = circuit.gates()[l.gate].targets.len();
                    PauliString::from_index(k, rng.gen_range(0..1u64 << (2 * k)))
                })
                .collect();
            twirl_with(circuit, &draws)
        })
        .collect()
}

/// Twirl with explicit `P_pre` per noisy location.
pub fn twirl_with(circuit: &Circuit, pre: &[PauliString]) -> Result<TwirledCircuit> {
    if pre.len() != circuit.noisy_locations().len() {
        return Err(Error::Dimension(format!("{} twirl Paulis for {} locations", pre.len(), circuit.noisy_locations().len())));
    }
    let mut out = Circuit::new(circuit.n());
    let mut sign = 1i8;
    let mut next = 0;
    for (i, g) in circuit.gates().iter().enumerate() {
        let loc = circuit.noisy_locations().get(next).filter(|l| l.gate == i);
        match loc {
            Some(l) => {
                let p = pre[next];
                let (post, s) = conjugate_through(g, &p)?;
                sign *= s;
                if !p.is_identity() {
                    out.push(Gate::pauli(p, g.targets.clone()))?;
                }
                out.push_noisy(g.clone(), l.channel.clone())?;
                if !post.is_identity() {
                    out.push(Gate::pauli(post, g.targets.clone()))?;
                }
                next += 1;
            }
            None => {
                out.push(g.clone())?;
            }
        }
    }
    Ok(TwirledCircuit { circuit: out, sign })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::depolarizing_model;
    use crate::rng::substream;
    use crate::sim::{LocalPtm, StateVector};
    use num_complex::Complex64;
    use std::sync::Arc;

    fn circuit() -> Circuit {
        let mut c = Circuit::new(3);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::rx(2, 0.3)).unwrap();
        c.push_noisy(Gate::cnot(0, 1), Arc::new(depolarizing_model(0.05, [0, 1]).unwrap())).unwrap();
        c.push(Gate::rz(1, 0.8)).unwrap();
        c.push_noisy(Gate::cz(1, 2), Arc::new(depolarizing_model(0.05, [1, 2]).unwrap())).unwrap();
        c
    }

    #[test]
    fn twirled_circuit_same_state() {
        let c = circuit();
        let mut ideal = StateVector::<f64>::zero(3);
        ideal.run(&c).unwrap();
        let mut rng = substream(3, 0, 0);
        for t in pauli_twirl(&c, &mut rng, 20).unwrap() {
            let mut s = StateVector::<f64>::zero(3);
            s.run(&t.circuit).unwrap();
            let overlap: Complex64 = s.amplitudes().iter().zip(ideal.amplitudes()).map(|(a, b)| a.conj() * b).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-10);
            assert!((overlap.re - t.sign as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_twirl_is_unchanged() {
        let c = circuit();
        let id = vec![PauliString::identity(2); 2];
        let t = twirl_with(&c, &id).unwrap();
        assert_eq!(t.circuit, c);
        assert_eq!(t.sign, 1);
    }

    #[test]
    fn non_clifford_noisy_gate_rejected() {
        let mut c = Circuit::new(1);
        let ch = crate::noise::PauliChannel::identity(vec![0]);
        c.push_noisy(Gate::rx(0, 0.1), Arc::new(ch)).unwrap();
        let mut rng = substream(0, 0, 0);
        assert!(matches!(pauli_twirl(&c, &mut rng, 1), Err(Error::NonClifford(0))));
    }

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let d = a.len();
        (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
    }

    #[test]
    fn twirled_coherent_error_is_pauli_diagonal() {
        // Noisy CNOT = CNOT · (RZ(0.2) ⊗ RX(0.1)) over-rotation.
        let cnot = Gate::cnot(0, 1);
        let err = {
            let mut c = Circuit::new(2);
            c.push(Gate::rz(0, 0.2)).unwrap();
            c.push(Gate::rx(1, 0.1)).unwrap();
            let mut u = vec![Complex64::new(0.0, 0.0); 16];
            for k in 0..4 {
                let mut s = StateVector::<f64>::basis(2, k);
                s.run(&c).unwrap();
                for (r, a) in s.amplitudes().iter().enumerate() {
                    u[r * 4 + k] = *a;
                }
            }
            LocalPtm::from_unitary(2, &u).dense()
        };
        let g = cnot.local_ptm().dense();
        let noisy = matmul(&g, &err);
        let mut avg = vec![vec![0.0; 16]; 16];
        for p in PauliString::all(2) {
            let (post, _) = conjugate_through(&cnot, &p).unwrap();
            let pre = Gate::pauli(p, vec![0, 1]).local_ptm().dense();
            let post = Gate::pauli(post, vec![0, 1]).local_ptm().dense();
            let t = matmul(&post, &matmul(&noisy, &pre));
            for i in 0..16 {
                for j in 0..16 {
                    avg[i][j] += t[i][j] / 16.0;
                }
            }
        }
        // G^T · avg is the twirled error channel.
        let gt: Vec<Vec<f64>> = (0..16).map(|i| (0..16).map(|j| g[j][i]).collect()).collect();
        let chan = matmul(&gt, &avg);
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert!(chan[i][j].abs() < 1e-10, "({i},{j}) = {}", chan[i][j]);
                }
            }
        }
        assert!(chan[1][1] < 1.0 - 1e-4);
    }
}
