use thiserror::Error;

/// Errors raised by the in-memory simulation layers (state algebra, oracle
/// construction, protocols and the LOCC run).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subsystem `{0}` must have dimension >= 1")]
    ZeroDimension(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSelection(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("invalid function table: {0}")]
    InvalidTable(String),

    #[error("minimal oracle requires a permutation")]
    NotPermutation,

    #[error("dense matrix too large: {0} > {1}")]
    SizeGuard(usize, usize),

    #[error("message {value} out of range 0..{bound}")]
    MessageOutOfRange { value: usize, bound: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
