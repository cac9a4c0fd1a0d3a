use thiserror::Error;

/// Errors produced by the measure, frame, transport and certificate layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("atom {index} has nonpositive mass {mass}")]
    NonpositiveMass { index: usize, mass: f64 },

    #[error("measure has empty support")]
    EmptySupport,

    #[error(
        "masses sum to {sum}, more than 1e-6 away from 1 (use forced normalization to rescale)"
    )]
    NotNormalized { sum: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("matrix is singular: smallest eigenvalue {lambda_min} <= tolerance {tol}")]
    SingularMatrix { lambda_min: f64, tol: f64 },

    #[error("measure is not a frame: lower bound {lower} <= tolerance {tol}")]
    NotAFrame { lower: f64, tol: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("coupling is not a dual witness: moment residual {residual:e} exceeds {tol:e}")]
    NotADualWitness { residual: f64, tol: f64 },

    #[error("automatic delta requires lambda1 = lambda2 = 0")]
    AutoRequiresZeroLambdas,

    #[error("digest mismatch: certificate was computed for {expected}, got {found}")]
    DigestMismatch { expected: String, found: String },

    #[error("certificate premise is not satisfied; nothing to validate")]
    PremiseNotSatisfied,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
