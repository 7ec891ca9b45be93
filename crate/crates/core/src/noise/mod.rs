//! Pauli channels, quasi-probability inverses and twirling.

mod channel;
mod model;
mod quasi;
mod twirl;

pub use channel::{gamma, PauliChannel, PauliTerm};
pub use model::{build_noisy_circuit, depolarizing_model, depolarizing_term_rate, local_depolarizing, NoiseModel};
pub use quasi::{enumerate_patterns, sample_insertion, InsertionPattern, QuasiProbRep};
pub use twirl::{conjugate_through, pauli_twirl, twirl_with, TwirledCircuit};
