use thiserror::Error;

use crate::metric::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid metric: {}", describe(.0))]
    InvalidSpace(Vec<Violation>),

    #[error("invalid cross metric: {}", describe(.0))]
    InvalidCross(Vec<Violation>),

    #[error("cross metrics live on different spaces")]
    SpaceMismatch,

    #[error("empty subset")]
    EmptySubset,

    #[error("unknown point label `{0}`")]
    UnknownLabel(String),

    #[error("scale family: {0}")]
    Family(String),

    #[error("ray `{ray}` has no samples in the tail window of stage {stage}")]
    NoSamples { ray: String, stage: usize },

    #[error("semigroup: {0}")]
    Semigroup(String),

    #[error("element is not in S_Phi")]
    NotInSPhi,

    #[error("PB(X_{0}) is too large to enumerate (n <= 6)")]
    TooLarge(usize),

    #[error("tree: {0}")]
    Tree(String),

    #[error("prefix map: {0}")]
    PrefixMap(String),

    #[error("grid: {0}")]
    Grid(String),

    #[error("isometry: {0}")]
    Isometry(String),

    #[error("malformed number `{0}`")]
    Number(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn describe(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
