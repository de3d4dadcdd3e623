use thiserror::Error;

/// The first invariant a candidate pm-space violates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("space has no points")]
    Empty,
    #[error("{labels} labels for {points} points")]
    LabelCount { labels: usize, points: usize },
    #[error("distance row {row} has length {len}, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("mass vector has length {len}, expected {expected}")]
    MassLength { len: usize, expected: usize },
    #[error("non-finite distance at ({i}, {j})")]
    NonFiniteDistance { i: usize, j: usize },
    #[error("negative distance at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("nonzero diagonal at {i}")]
    NonzeroDiagonal { i: usize },
    #[error("asymmetric distance at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("distinct points {i} and {j} at distance zero")]
    Coincident { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("point {i} has non-positive mass")]
    NonPositiveMass { i: usize },
    #[error("masses sum to {sum}, expected 1")]
    MassSum { sum: f64 },
    #[error("exact mass {i} is malformed or disagrees with the float mass")]
    ExactMass { i: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(#[from] Violation),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("size limit exceeded: {what} = {actual} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn size(what: &'static str, actual: usize, limit: usize) -> Self {
        Error::SizeLimit { what, actual, limit }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
