//! Circuits and exact simulation backends.
//!
//! * [`StateVector`]: unitary evolution and shot sampling.
//! * [`DensityMatrix`]: exact channels and signed maps; the reference backend.
//! * [`PauliVector`]: the same mathematics in the Pauli-transfer basis, where Pauli
//!   channels and insertions are diagonal. Used by the mitigation engines.

mod circuit;
mod density;
mod gate;
pub(crate) mod index;
mod observable;
mod ptm;
mod statevector;

pub use circuit::{Circuit, NoisyLocation};
pub use density::DensityMatrix;
pub use gate::{Gate, GateKind, LocalPtm};
pub use observable::PauliSum;
pub use ptm::{conjugation_signs, PauliVector, PtmOp};
pub use statevector::{sample_counts, StateVector};
