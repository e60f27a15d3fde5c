//! Numerical tools for quasiperiodic SL(2,R) cocycles: Lyapunov exponents,
//! fibered rotation numbers, monotonicity certificates, complexified invariant
//! sections, the conformal barycenter, renormalization and conjugacies.

pub mod algebra;
pub mod barycenter;
pub mod cocycle;
pub mod complexify;
pub mod conjugacy;
pub mod error;
pub mod grid;
pub mod lyap;
pub mod monotone;
pub mod renorm;
pub mod rotnum;
pub mod section;
pub mod trigpoly;

pub use error::{Error, Result};

/// (√5 − 1)/2
pub const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// √2 − 1
pub const SILVER: f64 = 0.414_213_562_373_095_03;
