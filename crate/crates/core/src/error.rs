use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("non-finite gate angle {0}")]
    NonFiniteAngle(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rate {rate} out of range: {why}")]
    RateOutOfRange { rate: f64, why: &'static str },
    #[error("amplification factor diverges: 2·m·ε = {0} ≥ 1")]
    GammaDivergence(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("non-finite objective value {value} at evaluation {evaluation}")]
    NonFiniteObjective { value: f64, evaluation: usize },
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("design matrix rank {rank} < {cols} columns; null space spanned by {null_space:?}")]
    RankDeficient {
        rank: usize,
        cols: usize,
        null_space: Vec<Vec<f64>>,
    },
    #[error("non-Clifford noisy gate at index {0}")]
    NonClifford(usize),
    #[error("sample set does not match circuit: {0}")]
    SetMismatch(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
