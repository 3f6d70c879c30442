use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{field}: probability out of range: {value}")]
    ProbabilityOutOfRange { field: String, value: f64 },

    #[error("{field}: expected at least {min} entries, got {got}")]
    TooFewEntries {
        field: String,
        min: usize,
        got: usize,
    },

    #[error("{field}: vector is identically zero")]
    ZeroVector { field: String },

    #[error("{field}: maximum is attained more than once (unique optimal entry required)")]
    NonUniqueArgmax { field: String },

    #[error("neither u nor v has all entries strictly positive")]
    NotPositive,

    #[error("self-edge at vertex {0}")]
    SelfEdge(usize),

    #[error("vertex {vertex} out of range (vertex count {count})")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("instance is not unimodal: {0}")]
    NotUnimodal(Violation),

    #[error("path start is the optimal entry ({0}, {1})")]
    StartIsOptimal(usize, usize),

    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("arm {0} has never been pulled; initialization is incomplete")]
    Uninitialized(usize),

    #[error("reward must be 0 or 1, got {0}")]
    InvalidReward(u8),

    #[error("gamma must be >= 2, got {0}")]
    GammaTooSmall(u64),

    #[error("{0} requires a finite gamma")]
    InfiniteGammaUnsupported(&'static str),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("insufficient checkpoints: {0}")]
    InsufficientCheckpoints(String),
}
