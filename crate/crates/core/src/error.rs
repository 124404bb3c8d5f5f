//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by constructors, solvers, and verification routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parity violation: {0}")]
    ParityViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero-temperature bath rejected: {0}")]
    ZeroTemperature(String),

    #[error("exponent {0} has no partner of opposite sign")]
    MissingPartner(usize),

    #[error(
        "quadrature did not converge: error estimate {estimate:.3e} above tolerance {tolerance:.3e}"
    )]
    QuadratureNoConvergence { estimate: f64, tolerance: f64 },

    #[error("hierarchy depth {depth} exceeds exponent count {exponents}")]
    DepthExceedsExponents { depth: usize, exponents: usize },

    #[error("repeated exponent index {0} in ADO label")]
    RepeatedExponentIndex(usize),

    #[error(
        "even-standard hierarchy requires even-parity initial data \
         (odd component has norm {0:.3e}); use the generalized mode instead"
    )]
    OddStateEvenSolver(f64),

    #[error("integrator step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite value encountered in state at t = {t:.6e}")]
    NonFiniteState { t: f64 },

    #[error("time grid must be uniform and ascending: {0}")]
    NonUniformGrid(String),

    #[error("global dimension 2^{total_modes} exceeds the oracle cap 2^{cap}")]
    DimensionTooLarge { total_modes: usize, cap: usize },

    #[error("delta-correlated (flat) bath has no pointwise correlation function; {0}")]
    DeltaCorrelated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
