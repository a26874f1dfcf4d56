use thiserror::Error;

/// Errors raised by the linear algebra, channel, process and model layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not unitary (max |UU† - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("superoperator is not invertible (condition number {condition:e})")]
    NotInvertible { condition: f64 },

    #[error("observable is degenerate (outcome {outcome} has rank {rank})")]
    DegenerateObservable { outcome: usize, rank: usize },

    #[error("invalid intervention sequence: {0}")]
    Sequence(String),

    #[error("dynamical maps not derivable: {0}")]
    NotDerivable(String),

    #[error("closed form is singular at t = 2s (t = {t}, s = {s})")]
    SingularTime { t: f64, s: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
