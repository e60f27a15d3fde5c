use thiserror::Error;

use crate::monotone::MonotonicityReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unit circle passes through the pole (|d| = {d_abs}, |c| = {c_abs})")]
    PoleOnCircle { d_abs: f64, c_abs: f64 },
    #[error("tau vanishes (|tau| = {0:e}); matrix is outside the closed contracting set")]
    DegenerateTau(f64),
    #[error("phase jump of {jump} revolutions at index {index}; refine the sampling")]
    UnwrapStep { index: usize, jump: f64 },
    #[error("point {0} is on or outside the unit circle")]
    BoundaryPoint(f64),
    #[error("winding {0} is not close to an integer")]
    NonIntegerWinding(f64),
    #[error("overflow evaluating at complex point (strip too wide)")]
    Overflow,
    #[error("not monotonic: derivative changes sign (min {}, max {})", .0.min_value, .0.max_value)]
    NotMonotonic(Box<MonotonicityReport>),
    #[error("sign uniform but margin {} exceeds |extremum| {}; refine grids", .0.margin, .0.epsilon.abs())]
    Uncertified(Box<MonotonicityReport>),
    #[error("moment system ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("undersampled: {samples} samples inside kernel support, need {needed}")]
    Undersampled { samples: usize, needed: usize },
    #[error("determinant of the extension nearly vanishes ({0:e})")]
    DetVanishes(f64),
    #[error("neither half-plane contracts at t = {0}")]
    NoContraction(f64),
    #[error("graph transform contracts too slowly (ratio {0})")]
    SlowContraction(f64),
    #[error("Lyapunov exponent {0} is not zero at the probe point")]
    NotAtZeroEnergy(f64),
    #[error("no convergence after {iterations} iterations (diameter {diameter:e})")]
    NoConvergence { iterations: usize, diameter: f64 },
    #[error("atom count {0} exceeds the cap")]
    AtomBlowup(usize),
    #[error("alpha is rational to working precision at level {0}")]
    RationalAlpha(usize),
    #[error("commutation residual {0:e} too large")]
    CommutationResidual(f64),
    #[error("no real logarithm chart for the matrix (trace {0})")]
    ChartMiss(f64),
    #[error("normalizing map or representative residual {0:e} too large")]
    PeriodicityResidual(f64),
    #[error("small divisors at modes {0:?}")]
    SmallDivisor(Vec<Vec<i64>>),
    #[error("no lattice vector within tolerance {0:e}")]
    LatticeSearchFail(f64),
    #[error("family kind not supported here: {0}")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
