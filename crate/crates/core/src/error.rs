use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} lies on the cut [0, inf) of the square root")]
    CutContact(Complex64),

    #[error("argument {0} is outside the domain Re w > 0")]
    Domain(Complex64),

    #[error("quadrature did not converge: estimate {estimate:e} above tolerance {tolerance:e} after {subdivisions} subdivisions")]
    Nonconvergence {
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("principal-value pole {0} is not interior to the integration range")]
    PoleAtEndpoint(f64),

    #[error("line multiplier vanishes at p = {p}, z = {z}: energy touches the guided continuum")]
    Threshold { p: f64, z: Complex64 },

    #[error("integrand pole on the real momentum axis for z = {0}; use the continued determinant")]
    PoleOnPath(Complex64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("root bracket failure: {0}")]
    BracketFailure(String),

    #[error("root search did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("point {z} with sheet label {label} is outside the implemented region")]
    OutOfRegion { z: Complex64, label: &'static str },

    #[error("evaluation at the singular point {0:?}")]
    SingularPoint([f64; 2]),

    #[error("contour passes through or too close to a zero (|f| = {0:e})")]
    ContourThroughZero(f64),

    #[error("oracle precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("grid resolution error: {0}")]
    GridResolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
