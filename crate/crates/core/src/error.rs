use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("non-finite coordinate in kinetic point")]
    NonFiniteCoordinate,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("grid too small along {axis}: need at least {needed} points, have {have}")]
    GridTooSmall {
        axis: &'static str,
        needed: usize,
        have: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("bad magic")]
    BadMagic,

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("point is not a grid node: {0}")]
    NotOnGrid(String),

    #[error("point too close to the grid boundary for stencils")]
    NearBoundary,

    #[error("too few sample points in cylinder: have {have}, need {needed}")]
    TooFewPoints { have: usize, needed: usize },

    #[error("no admissible cylinder in the domain")]
    NoAdmissibleCylinder,

    #[error("shift radius {0} too large for the domain")]
    RadiusTooLarge(f64),

    #[error("source has no compact support in time")]
    NonCompactSource,

    #[error("quadrature budget exceeded: estimated error {estimate:e} above tolerance {tolerance:e}")]
    QuadratureBudget { estimate: f64, tolerance: f64 },

    #[error("linear solve failed: diagonal dominance lost at row {row}")]
    DiagonalDominance { row: usize },

    #[error("non-finite state detected at step {step}")]
    NanDetected { step: usize },

    #[error("Picard iteration does not contract: ratio history {ratios:?}")]
    NonContraction { ratios: Vec<f64> },

    #[error("under-resolved grid: {0}")]
    UnderResolved(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("derivative below noise floor: |D g(0)| = {value:e}")]
    NoiseFloor { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
