//! Circuits compiled to Pauli-transfer ops, split at noisy locations.

use crate::error::Result;
use crate::scalar::Real;
use crate::sim::{Circuit, GateKind, PauliVector, PtmOp};
use crate::sim::conjugation_signs;

type Dense = Vec<Vec<f64>>;

/// A compiled noisy circuit.
///
/// Position `ℓ` is the point just before noisy location `ℓ`'s channel. `pre` takes the
/// initial state to position 0; `blocks[ℓ]` (channel ℓ, gate ℓ, and the noiseless gates
/// up to the next location) takes position `ℓ` to `ℓ + 1`, with position `L` the output.
#[derive(Debug, Clone)]
pub(crate) struct Program<T: Real> {
    pub n: usize,
    pub pre: Vec<PtmOp<T>>,
    pub blocks: Vec<Vec<PtmOp<T>>>,
    /// Transposes of `blocks`, in application order for Heisenberg evolution.
    pub blocks_t: Vec<Vec<PtmOp<T>>>,
    /// Gate targets of each location.
    pub targets: Vec<Vec<usize>>,
}

impl<T: Real> Program<T> {
    pub fn compile(circuit: &Circuit) -> Result<Self> {
        circuit.validate()?;
        let n = circuit.n();
        let locs = circuit.noisy_locations();
        let mut pre = Vec::new();
        let mut blocks: Vec<Vec<(Vec<usize>, Dense)>> = vec![Vec::new(); locs.len()];
        let mut next = 0;
        for (i, g) in circuit.gates().iter().enumerate() {
            let item = match &g.kind {
                GateKind::Pauli(p) => (g.targets.clone(), diag_dense(&conjugation_signs(p))),
                _ => (g.targets.clone(), g.local_ptm().dense()),
            };
            if next < locs.len() && locs[next].gate == i {
                let ch = &locs[next].channel;
                blocks[next].push((ch.qubits().to_vec(), diag_dense(&ch.transfer_diagonal())));
                blocks[next].push(item);
                next += 1;
            } else if next == 0 {
                pre.push(item);
            } else {
                blocks[next - 1].push(item);
            }
        }
        let pre_ops = fuse(n, pre, false);
        let blocks_ops: Vec<Vec<PtmOp<T>>> = blocks.iter().map(|b| fuse(n, b.clone(), false)).collect();
        let blocks_t = blocks.into_iter().map(|b| fuse(n, b, true)).collect();
        let targets = locs.iter().map(|l| circuit.gates()[l.gate].targets.clone()).collect();
        Ok(Program { n, pre: pre_ops, blocks: blocks_ops, blocks_t, targets })
    }

    pub fn locations(&self) -> usize {
        self.blocks.len()
    }

    /// States at positions `0..=L` without insertions.
    pub fn forward_snapshots(&self) -> Vec<PauliVector<T>> {
        let mut v = PauliVector::zero_state(self.n);
        for op in &self.pre {
            v.apply(op);
        }
        let mut out = Vec::with_capacity(self.blocks.len() + 1);
        out.push(v.clone());
        for b in &self.blocks {
            for op in b {
                v.apply(op);
            }
            out.push(v.clone());
        }
        out
    }

    /// Heisenberg-evolved observables at positions `0..=L`; `⟨B_ℓ, F_ℓ⟩` is the
    /// expectation for every `ℓ`.
    pub fn backward_snapshots(&self, h: &PauliVector<T>) -> Vec<PauliVector<T>> {
        let mut out = vec![h.clone(); self.blocks.len() + 1];
        for l in (0..self.blocks.len()).rev() {
            let mut v = out[l + 1].clone();
            self.step_back(&mut v, l);
            out[l] = v;
        }
        out
    }

    #[inline]
    pub fn step(&self, v: &mut PauliVector<T>, l: usize) {
        for op in &self.blocks[l] {
            v.apply(op);
        }
    }

    #[inline]
    pub fn step_back(&self, v: &mut PauliVector<T>, l: usize) {
        for op in &self.blocks_t[l] {
            v.apply(op);
        }
    }
}

fn diag_dense(f: &[f64]) -> Dense {
    (0..f.len()).map(|a| (0..f.len()).map(|b| if a == b { f[a] } else { 0.0 }).collect()).collect()
}

/// Re-expresses a local transfer matrix on `t` over the larger target list `u ⊇ t`.
fn embed(m: &Dense, t: &[usize], u: &[usize]) -> Dense {
    let (kt, ku) = (t.len(), u.len());
    let pos: Vec<usize> = t.iter().map(|q| u.iter().position(|x| x == q).expect("subset")).collect();
    let to_t = |l: usize| {
        let mut r = 0;
        for (j, &p) in pos.iter().enumerate() {
            r |= (l >> p & 1) << j;
            r |= (l >> (ku + p) & 1) << (kt + j);
        }
        r
    };
    let rest_mask: usize = (0..ku)
        .filter(|j| !pos.contains(j))
        .map(|j| (1 << j) | (1 << (ku + j)))
        .sum();
    let d = 1 << (2 * ku);
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| if a & rest_mask == b & rest_mask { m[to_t(a)][to_t(b)] } else { 0.0 })
                .collect()
        })
        .collect()
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i][k];
            if x != 0.0 {
                for j in 0..d {
                    out[i][j] += x * b[k][j];
                }
            }
        }
    }
    out
}

fn transpose(m: &Dense) -> Dense {
    let d = m.len();
    (0..d).map(|i| (0..d).map(|j| m[j][i]).collect()).collect()
}

/// Multiplies runs of consecutive ops whose combined support has at most two qubits.
/// With `transposed`, returns the ops of the transposed product in application order.
fn fuse<T: Real>(n: usize, items: Vec<(Vec<usize>, Dense)>, transposed: bool) -> Vec<PtmOp<T>> {
    let mut fused: Vec<(Vec<usize>, Dense)> = Vec::new();
    for (t, m) in items {
        if let Some((u, acc)) = fused.last_mut() {
            let mut union = u.clone();
            for q in &t {
                if !union.contains(q) {
                    union.push(*q);
                }
            }
            if union.len() <= 2 {
                let a = embed(acc, u, &union);
                let b = embed(&m, &t, &union);
                *acc = matmul(&b, &a);
                *u = union;
                continue;
            }
        }
        fused.push((t, m));
    }
    let clean = |m: Dense| -> Dense {
        m.into_iter().map(|r| r.into_iter().map(|x| if x.abs() < 1e-15 { 0.0 } else { x }).collect()).collect()
    };
    if transposed {
        fused.into_iter().rev().map(|(t, m)| PtmOp::from_dense(n, &t, &clean(transpose(&m)))).collect()
    } else {
        fused.into_iter().map(|(t, m)| PtmOp::from_dense(n, &t, &clean(m))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::local_depolarizing;
    use crate::qaoa::QaoaProblem;

    #[test]
    fn compiled_program_matches_direct_run() {
        let q = QaoaProblem::new("ring_4".parse().unwrap(), 2);
        let ch = local_depolarizing(0.05, [0, 1]).unwrap();
        let c = q.noisy_ansatz(&[0.21, 0.36, 0.63, 0.77], &ch).unwrap();
        let prog = Program::<f64>::compile(&c).unwrap();
        assert_eq!(prog.locations(), 16);
        let snaps = prog.forward_snapshots();
        let mut direct = PauliVector::<f64>::zero_state(4);
        direct.run(&c).unwrap();
        for (a, b) in snaps.last().unwrap().coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let h = PauliVector::observable(&q.cost_observable());
        let back = prog.backward_snapshots(&h);
        let e = direct.expectation(&q.cost_observable()).unwrap();
        for l in 0..=16 {
            assert!((back[l].dot(&snaps[l]) - e).abs() < 1e-12);
        }
    }
}
