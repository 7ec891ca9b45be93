//! Exact evaluation of every instance of a sample set.
//!
//! An instance with insertions `(ℓ_1, P_1) … (ℓ_k, P_k)` has expectation
//! `⟨B, D_{P_i} F⟩` at its middle insertion `i`, where `F` is the state at `ℓ_i` carrying the
//! earlier insertions and `B` the Heisenberg observable at `ℓ_i` carrying the later ones.
//! Because `D_{P_i}` is diagonal and depends only on the Paulis at `ℓ_i`'s targets, the
//! contraction reduces to a 16-entry overlap. Prefix states and suffix observables are
//! shared between instances through two tries, so each distinct partial insertion
//! sequence is propagated once per evaluation.

use std::collections::HashMap;

use super::program::Program;
use crate::error::{Error, Result};
use crate::noise::InsertionPattern;
use crate::pauli::PauliString;
use crate::scalar::Real;
use crate::sim::{conjugation_signs, index::LocalIndexer, PauliVector};

type Step = (usize, usize); // (location, local Pauli index)

#[derive(Debug, Clone)]
struct FwdNode {
    parent: usize,
    step: Step,
    needs: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Group {
    loc: usize,
    fwd: usize,
    members: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct BwdNode {
    parent: usize,
    step: Step,
    child_needs: Vec<usize>,
    /// Sorted by decreasing location.
    groups: Vec<Group>,
}

/// Parameter-independent evaluation schedule for one sample set.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    locations: usize,
    instances: usize,
    fwd: Vec<FwdNode>,
    bwd: Vec<BwdNode>,
    zero: Vec<usize>,
}

impl Plan {
    pub fn new(instances: &[InsertionPattern], locations: usize) -> Result<Self> {
        let root = Step::default();
        let mut fwd = vec![FwdNode { parent: 0, step: root, needs: Vec::new() }];
        let mut bwd = vec![BwdNode { parent: 0, step: (locations, 0), child_needs: Vec::new(), groups: Vec::new() }];
        let mut fkeys: HashMap<Vec<Step>, usize> = HashMap::new();
        let mut bkeys: HashMap<Vec<Step>, usize> = HashMap::new();
        let mut groups: Vec<HashMap<(usize, usize), Vec<(usize, usize)>>> = vec![HashMap::new()];
        let mut zero = Vec::new();

        fn intern_fwd(seq: &[Step], fwd: &mut Vec<FwdNode>, keys: &mut HashMap<Vec<Step>, usize>) -> usize {
            if seq.is_empty() {
                return 0;
            }
            if let Some(&id) = keys.get(seq) {
                return id;
            }
            let parent = intern_fwd(&seq[..seq.len() - 1], fwd, keys);
            let step = seq[seq.len() - 1];
            if parent != 0 {
                fwd[parent].needs.push(step.0);
            }
            fwd.push(FwdNode { parent, step, needs: Vec::new() });
            keys.insert(seq.to_vec(), fwd.len() - 1);
            fwd.len() - 1
        }

        fn intern_bwd(
            seq: &[Step],
            bwd: &mut Vec<BwdNode>,
            keys: &mut HashMap<Vec<Step>, usize>,
            groups: &mut Vec<HashMap<(usize, usize), Vec<(usize, usize)>>>,
        ) -> usize {
            if seq.is_empty() {
                return 0;
            }
            if let Some(&id) = keys.get(seq) {
                return id;
            }
            let parent = intern_bwd(&seq[1..], bwd, keys, groups);
            let step = seq[0];
            if parent != 0 {
                bwd[parent].child_needs.push(step.0);
            }
            bwd.push(BwdNode { parent, step, child_needs: Vec::new(), groups: Vec::new() });
            groups.push(HashMap::new());
            keys.insert(seq.to_vec(), bwd.len() - 1);
            bwd.len() - 1
        }

        for (j, inst) in instances.iter().enumerate() {
            let seq: Vec<Step> = inst
                .resolved
                .iter()
                .map(|(l, p)| {
                    if *l >= locations {
                        Err(Error::SetMismatch(format!("insertion at location {l} of {locations}")))
                    } else {
                        Ok((*l, p.index() as usize))
                    }
                })
                .collect::<Result<_>>()?;
            if seq.is_empty() {
                zero.push(j);
                continue;
            }
            let i = (seq.len() - 1) / 2;
            let f = intern_fwd(&seq[..i], &mut fwd, &mut fkeys);
            let b = intern_bwd(&seq[i + 1..], &mut bwd, &mut bkeys, &mut groups);
            let (loc, pauli) = seq[i];
            if f != 0 {
                fwd[f].needs.push(loc);
            }
            groups[b].entry((loc, f)).or_default().push((j, pauli));
        }
        for node in &mut fwd {
            node.needs.sort_unstable();
            node.needs.dedup();
        }
        for (node, g) in bwd.iter_mut().zip(groups) {
            node.child_needs.sort_unstable();
            node.child_needs.dedup();
            let mut gs: Vec<Group> = g.into_iter().map(|((loc, fwd), members)| Group { loc, fwd, members }).collect();
            gs.sort_by(|a, b| b.loc.cmp(&a.loc).then(a.fwd.cmp(&b.fwd)));
            node.groups = gs;
        }
        Ok(Plan { locations, instances: instances.len(), fwd, bwd, zero })
    }
}

/// Forward snapshots for one parameter point, reusable across observables.
pub(crate) struct ForwardCache<T: Real> {
    root: Vec<PauliVector<T>>,
    nodes: Vec<Vec<(usize, PauliVector<T>)>>,
}

impl<T: Real> ForwardCache<T> {
    fn get(&self, node: usize, loc: usize) -> &PauliVector<T> {
        if node == 0 {
            return &self.root[loc];
        }
        let list = &self.nodes[node];
        let k = list.binary_search_by_key(&loc, |(l, _)| *l).expect("snapshot registered");
        &list[k].1
    }
}

pub(crate) struct Engine<'a, T: Real> {
    program: &'a Program<T>,
    plan: &'a Plan,
    /// Per location, signs of every local Pauli and the overlap indexer.
    signs: Vec<Vec<Vec<T>>>,
    overlap: Vec<LocalIndexer>,
}

impl<'a, T: Real> Engine<'a, T> {
    pub fn new(program: &'a Program<T>, plan: &'a Plan) -> Result<Self> {
        if program.locations() != plan.locations {
            return Err(Error::SetMismatch(format!(
                "plan for {} locations, circuit has {}",
                plan.locations,
                program.locations()
            )));
        }
        let n = program.n;
        let mut signs = Vec::new();
        let mut overlap = Vec::new();
        for t in &program.targets {
            let k = t.len();
            signs.push(
                PauliString::all(k)
                    .map(|p| conjugation_signs(&p).into_iter().map(T::of).collect())
                    .collect(),
            );
            let pos: Vec<usize> = t.iter().copied().chain(t.iter().map(|&q| q + n)).collect();
            overlap.push(LocalIndexer::new(2 * n, &pos));
        }
        Ok(Engine { program, plan, signs, overlap })
    }

    fn insert(&self, v: &mut PauliVector<T>, (loc, pauli): Step) {
        let ix = &self.overlap[loc];
        let s = &self.signs[loc][pauli];
        let c = v.coeffs_mut();
        for g in 0..ix.groups() {
            let b = ix.base(g);
            for (o, f) in ix.offsets.iter().zip(s) {
                c[b + o] *= *f;
            }
        }
    }

    fn overlap(&self, f: &PauliVector<T>, b: &PauliVector<T>, loc: usize) -> Vec<T> {
        let ix = &self.overlap[loc];
        let (fc, bc) = (f.coeffs(), b.coeffs());
        let mut m = vec![T::zero(); ix.offsets.len()];
        for g in 0..ix.groups() {
            let base = ix.base(g);
            for (l, o) in ix.offsets.iter().enumerate() {
                m[l] += fc[base + o] * bc[base + o];
            }
        }
        m
    }

    pub fn forward(&self) -> ForwardCache<T> {
        let root = self.program.forward_snapshots();
        let mut cache = ForwardCache { root, nodes: vec![Vec::new(); self.plan.fwd.len()] };
        for id in 1..self.plan.fwd.len() {
            let node = &self.plan.fwd[id];
            let mut v = cache.get(node.parent, node.step.0).clone();
            self.insert(&mut v, node.step);
            let mut pos = node.step.0;
            let mut out = Vec::with_capacity(node.needs.len());
            for &need in &node.needs {
                while pos < need {
                    self.program.step(&mut v, pos);
                    pos += 1;
                }
                out.push((need, v.clone()));
            }
            cache.nodes[id] = out;
        }
        cache
    }

    /// Unsigned expectation of every instance for observable `h`.
    pub fn values(&self, cache: &ForwardCache<T>, h: &PauliVector<T>) -> Vec<T> {
        let plan = self.plan;
        let root = self.program.backward_snapshots(h);
        let mut values = vec![T::zero(); plan.instances];
        let base = root[0].dot(&cache.root[0]);
        for &j in &plan.zero {
            values[j] = base;
        }
        let mut stored: Vec<Vec<(usize, PauliVector<T>)>> = vec![Vec::new(); plan.bwd.len()];
        let get = |stored: &Vec<Vec<(usize, PauliVector<T>)>>, node: usize, loc: usize| -> PauliVector<T> {
            if node == 0 {
                return root[loc].clone();
            }
            let list = &stored[node];
            let k = list.binary_search_by_key(&loc, |(l, _)| *l).expect("snapshot registered");
            list[k].1.clone()
        };
        for id in 0..plan.bwd.len() {
            let node = &plan.bwd[id];
            let contract = |values: &mut Vec<T>, g: &Group, b: &PauliVector<T>| {
                let m = self.overlap(cache.get(g.fwd, g.loc), b, g.loc);
                for &(j, p) in &g.members {
                    let s = &self.signs[g.loc][p];
                    values[j] = m.iter().zip(s).map(|(a, b)| *a * *b).sum();
                }
            };
            if id == 0 {
                for g in &node.groups {
                    contract(&mut values, g, &root[g.loc]);
                }
                continue;
            }
            let mut v = get(&stored, node.parent, node.step.0);
            self.insert(&mut v, node.step);
            let mut pos = node.step.0;
            let mut gi = node.groups.iter().peekable();
            let mut ci = node.child_needs.iter().rev().peekable();
            let mut keep = Vec::new();
            loop {
                let next_g = gi.peek().map(|g| g.loc);
                let next_c = ci.peek().map(|&&l| l);
                let target = match (next_g, next_c) {
                    (None, None) => break,
                    (a, b) => a.max(b).expect("one is some"),
                };
                while pos > target {
                    pos -= 1;
                    self.program.step_back(&mut v, pos);
                }
                while let Some(g) = gi.next_if(|g| g.loc == target) {
                    contract(&mut values, g, &v);
                }
                if ci.next_if(|&&l| l == target).is_some() {
                    keep.push((target, v.clone()));
                }
            }
            keep.reverse();
            stored[id] = keep;
        }
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mitigation::sample_set::{build_sample_set, circuit_channels, InstanceMode};
    use crate::noise::local_depolarizing;
    use crate::qaoa::QaoaProblem;

    #[test]
    fn matches_per_instance_simulation() {
        let q = QaoaProblem::new("ring_4".parse().unwrap(), 2);
        // Large rate so most instances carry several insertions.
        let ch = local_depolarizing(0.4, [0, 1]).unwrap();
        let c = q.noisy_ansatz(&[0.21, 0.36, 0.63, 0.77], &ch).unwrap();
        let set = build_sample_set(&circuit_channels(&c), 1.0, 300, 11, InstanceMode::ExactExpectation).unwrap();
        assert!(set.instances().iter().any(|i| i.resolved.len() >= 6));
        let prog = Program::<f64>::compile(&c).unwrap();
        let plan = Plan::new(set.instances(), 16).unwrap();
        let engine = Engine::new(&prog, &plan).unwrap();
        let cache = engine.forward();
        let obs = q.cost_observable();
        let vals = engine.values(&cache, &PauliVector::observable(&obs));
        for (inst, v) in set.instances().iter().zip(vals) {
            let ic = c.with_insertions(&inst.resolved).unwrap();
            let mut s = PauliVector::<f64>::zero_state(4);
            s.run(&ic).unwrap();
            let want = s.expectation(&obs).unwrap();
            assert!((want - v).abs() < 1e-12, "{want} vs {v}");
        }
    }
}
