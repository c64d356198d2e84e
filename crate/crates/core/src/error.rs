use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix data of length {len} is not square")]
    NotSquare { len: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("not an orthogonal projector (max deviation {0:e})")]
    NotProjector(f64),

    #[error("projectors {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),

    #[error("projector family does not sum to identity (max deviation {0:e})")]
    Incomplete(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("probability {0:e} is too small to condition on")]
    ZeroProbability(f64),

    #[error("projector family must consist of rank-1 projectors (member {index} has rank {rank})")]
    NotRankOne { index: usize, rank: usize },

    #[error("trace has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("environment of {n} qubits exceeds cap of {cap}")]
    EnvironmentTooLarge { n: usize, cap: usize },

    #[error("amplitudes are not normalised (norm² = {0})")]
    NotNormalized(f64),

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid history family: {0}")]
    InvalidHistory(String),

    #[error("enumeration of {count} histories exceeds cap of {cap}")]
    EnumerationCap { count: u128, cap: u128 },
}
