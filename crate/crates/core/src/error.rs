use thiserror::Error;

use crate::assignment::KeyRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular (|det| = {det:e} <= {tol:e})")]
    SingularMatrix { det: f64, tol: f64 },

    #[error("no grid node satisfies the indicator")]
    EmptyRegion,

    #[error("point lies outside the ball (distance {distance}, radius {radius})")]
    OutsideBall { distance: f64, radius: f64 },

    #[error("cannot choose {j} elements out of {i}")]
    BadSize { i: usize, j: usize },

    #[error("rejection sampler exceeded {0} proposals")]
    RejectionCap(usize),

    #[error("coupling entry ({i},{j}) = {value:e} is negative; lambda is below k(alpha)")]
    NegativeMass { i: usize, j: usize, value: f64 },

    #[error("truncation {got} is below the required {required}")]
    TruncationTooSmall { got: usize, required: usize },

    #[error("no lambda on the search grid up to {max} gives a nonnegative coupling for alpha = {alpha}")]
    NotFound { alpha: f64, max: f64 },

    #[error("ball of radius {radius} around the candidate leaves the window")]
    OutsideMargin { radius: f64 },

    #[error("halo holds {0} points")]
    TooFewHaloPoints(usize),

    #[error("region mean {mean} does not exceed the coupling threshold {threshold}")]
    RegionTooSmall { mean: f64, threshold: f64 },

    #[error("{} keys in the interior are undetermined", .0.len())]
    UndeterminedKeys(Vec<KeyRef>),

    #[error("no globe in the window")]
    NoGlobes,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
