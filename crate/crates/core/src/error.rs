use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parameter length mismatch for {block}: expected {expected}, found {found}")]
    ParamLengthMismatch {
        block: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("steady state is not unique (null space dimension {dim})")]
    DegenerateSteadySpace { dim: usize },

    #[error("no steady state found at tolerance {tol:.3e}")]
    NoSteadyState { tol: f64 },

    #[error("bad parameter `{field}`: {reason}")]
    BadParams { field: String, reason: String },

    #[error("too few shadows: need at least {needed}, have {have}")]
    TooFewShadows { needed: usize, have: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("tolerance out of range: {0}")]
    BadTolerance(String),

    #[error("parameter {index} is not a Pauli rotation; frequency set {frequencies:?}")]
    WrongFrequencySet { index: usize, frequencies: Vec<f64> },

    #[error("shift system is singular for spacing {spacing}")]
    SingularSystem { spacing: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
