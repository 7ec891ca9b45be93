//! Few-qubit circuit simulation and quasi-probability error mitigation for QAOA MaxCut.
//!
//! The crate is organised bottom-up:
//!
//! * [`pauli`] and [`sim`]: Pauli strings, gates, circuits, and three exact backends
//!   (statevector, density matrix, Pauli-transfer vector).
//! * [`noise`]: Pauli channels, quasi-probability inverses, insertion sampling, twirling.
//! * [`qaoa`]: graphs, the layered ansatz, the MaxCut objective and landscape scans.
//! * [`optimize`]: Nelder–Mead with step traces.
//! * [`mitigation`]: noisy / PEC / invariant-PEC / ZNE estimators, the adaptive partial
//!   schedule, distribution mitigation and readout correction.
//! * [`learning`]: cycle benchmarking and non-negative least squares rate fitting.
//! * [`cost`]: sampling-cost accounting.
//!
//! Qubit 0 is the least significant bit of basis-state indices. Bitstring and Pauli
//! labels are printed most-significant qubit first, so `"0101"` has qubits 0 and 2 set.
//!
//! The state types and the optimizer are generic over [`Real`] (`f32` or `f64`);
//! everything above the simulators works in `f64`. The aliases below fix the scalar.

pub mod cost;
pub mod error;
pub mod learning;
pub mod mitigation;
pub mod noise;
pub mod optimize;
pub mod pauli;
pub mod qaoa;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString};
pub use scalar::Real;

pub type StateVector = sim::StateVector<f64>;
pub type DensityMatrix = sim::DensityMatrix<f64>;
pub type PauliVector = sim::PauliVector<f64>;
pub type Trace = optimize::Trace<f64>;
pub type OptimizerConfig = optimize::OptimizerConfig<f64>;
