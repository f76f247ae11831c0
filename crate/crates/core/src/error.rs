//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by construction, evaluation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("number of components {0} exceeds the supported maximum of 16")]
    NTooLarge(usize),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("component index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("identity order {order} out of range 1..={n}")]
    OrderOutOfRange { order: usize, n: usize },
    #[error("denominator vanished at x = {0}")]
    DenominatorZero(f64),
    #[error("spectrum does not match the requested degenerate case")]
    CaseMismatch,
    #[error("operation requires exactly three components, got {0}")]
    RequiresThreeComponents(usize),
    #[error("ratio q must be nonzero; q = 0 belongs to the degenerate vanishing cases")]
    ZeroRatio,
    #[error("p = {0} sits on the pole of the admissibility function")]
    PoleAtP(f64),
    #[error("could not bracket the roots of the admissibility function: {0}")]
    RootBracketFailure(String),
    #[error("no branch points found: {0}")]
    EmptyBranch(String),
    #[error("parameter a_{0} is zero")]
    ZeroParameter(usize),
    #[error("mu_{i} != mu_{j}: rotation kernel needs equal chemical potentials")]
    UnequalMu { i: usize, j: usize },
    #[error("eigensolver failure: {0}")]
    EigenFailure(String),
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("quadrature tolerance not met: estimate {estimate:e} > {tol:e}")]
    ToleranceNotMet { estimate: f64, tol: f64 },
    #[error("step size underflow at x = {0}")]
    StepUnderflow(f64),
    #[error("function values at bracket ends have the same sign: f({a}) = {fa:e}, f({b}) = {fb:e}")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
