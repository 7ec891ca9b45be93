use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::{Error, Result};
use crate::noise::{build_noisy_circuit, PauliChannel};
use crate::pauli::{Pauli, PauliString};
use crate::sim::{Circuit, Gate, PauliSum, PauliVector, StateVector};

/// QAOA angles for `p` layers.
///
/// Entry `l` (`l < p`) drives the cost evolution of layer `l` and entry `p + l` its mixer.
/// Values are in units of π: the cost block of an edge is `CNOT · RZ(π·v) · CNOT` and the
/// mixer is `RX(π·v)` on every qubit. Published parameter listings `[β…, γ…]` use this
/// same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!("odd parameter count {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteAngle(*v));
        }
        Ok(ParameterVector(values))
    }

    pub fn layers(&self) -> usize {
        self.0.len() / 2
    }

    pub fn cost_angles(&self) -> &[f64] {
        &self.0[..self.layers()]
    }

    pub fn mixer_angles(&self) -> &[f64] {
        &self.0[self.layers()..]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParameterVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// MaxCut on `graph` with a `p`-layer ansatz.
///
/// The minimised observable is `H = −Σ_{(i,j)∈E} (1 − Z_i Z_j)/2`, so `⟨H⟩ = −N_cut`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaProblem {
    pub graph: Graph,
    pub p: usize,
}

impl QaoaProblem {
    pub fn new(graph: Graph, p: usize) -> Self {
        QaoaProblem { graph, p }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn num_params(&self) -> usize {
        2 * self.p
    }

    /// `H` including its constant `−|E|/2`.
    pub fn cost_observable(&self) -> PauliSum {
        let n = self.n();
        let mut terms = vec![(PauliString::identity(n), -(self.graph.edges().len() as f64) / 2.0)];
        for &(a, b) in self.graph.edges() {
            let mut zz = PauliString::single(n, a, Pauli::Z);
            zz.set(b, Pauli::Z);
            terms.push((zz, 0.5));
        }
        PauliSum::new(n, terms).expect("well-formed observable")
    }

    /// `H_B = Σ_i X_i`
    pub fn mixer_observable(&self) -> PauliSum {
        let n = self.n();
        PauliSum::new(n, (0..n).map(|q| (PauliString::single(n, q, Pauli::X), 1.0)).collect())
            .expect("well-formed observable")
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Dimension(format!("{} parameters for p = {}", params.len(), self.p)));
        }
        ParameterVector::new(params.to_vec()).map(|_| ())
    }

    /// Noiseless ansatz circuit.
    pub fn ansatz(&self, params: &[f64]) -> Result<Circuit> {
        self.check_params(params)?;
        let n = self.n();
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.push(Gate::h(q))?;
        }
        for l in 0..self.p {
            let (cost, mix) = (params[l], params[self.p + l]);
            for &(a, b) in self.graph.edges() {
                c.push(Gate::cnot(a, b))?;
                c.push(Gate::rz(b, PI * cost))?;
                c.push(Gate::cnot(a, b))?;
            }
            for q in 0..n {
                c.push(Gate::rx(q, PI * mix))?;
            }
        }
        Ok(c)
    }

    /// Ansatz with `model` (a two-qubit template) attached to every CNOT.
    pub fn noisy_ansatz(&self, params: &[f64], model: &PauliChannel) -> Result<Circuit> {
        build_noisy_circuit(&self.ansatz(params)?, model)
    }

    /// Uniform distribution over the maximum cuts.
    pub fn maxcut_distribution(&self) -> Vec<f64> {
        let best = self.graph.max_cut();
        let hits: Vec<bool> = (0..1usize << self.n()).map(|b| self.graph.cut_value(b) == best).collect();
        let count = hits.iter().filter(|&&h| h).count() as f64;
        hits.into_iter().map(|h| if h { 1.0 / count } else { 0.0 }).collect()
    }
}

/// Build the ansatz for `problem` (free-function form).
pub fn build_ansatz(problem: &QaoaProblem, params: &[f64]) -> Result<Circuit> {
    problem.ansatz(params)
}

#[derive(Debug, Clone, Copy)]
pub enum Mode<'a> {
    Ideal,
    /// Channel template attached to every CNOT.
    Noisy(&'a PauliChannel),
}

/// Expected number of cut edges, `−⟨H⟩`.
pub fn n_cut(problem: &QaoaProblem, params: &[f64], mode: Mode<'_>) -> Result<f64> {
    Ok(-energy(problem, params, mode)?)
}

/// `⟨H⟩`: statevector for the ideal mode, Pauli-transfer simulation with channels
/// otherwise.
pub fn energy(problem: &QaoaProblem, params: &[f64], mode: Mode<'_>) -> Result<f64> {
    let h = problem.cost_observable();
    match mode {
        Mode::Ideal => {
            let mut psi = StateVector::<f64>::zero(problem.n());
            psi.run(&problem.ansatz(params)?)?;
            psi.expectation(&h)
        }
        Mode::Noisy(model) => {
            let mut v = PauliVector::<f64>::zero_state(problem.n());
            v.run(&problem.noisy_ansatz(params, model)?)?;
            v.expectation(&h)
        }
    }
}

/// Euclidean distance between parameter vectors.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {} parameters", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}
