use thiserror::Error;

/// Errors produced by solver entry points, instance generation, and the
/// geometric primitives.
///
/// Numerical routines themselves are total once their inputs validate; every
/// variant here describes a rejected input or a violated precondition, never
/// an internal failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A vector argument does not match the dimension of the domain or
    /// problem it is used with.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A point that must belong to the domain lies outside it beyond the
    /// membership tolerance.
    #[error("point outside domain: coordinate {index} = {value:e} violates [{lower:e}, {upper:e}]")]
    OutsideDomain {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    /// A scalar or shape parameter violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The outer loop requires a feasible start: `g(x0) <= 0`.
    #[error("infeasible start: g(x0) = {0:e} > 0")]
    InfeasibleStart(f64),

    /// No feasible start point was found within the sampling budget.
    #[error("no feasible start sampled after {attempts} attempts")]
    NoFeasibleStart { attempts: usize },

    /// The inner solver requires its start to satisfy the switching
    /// threshold: `G(z0) <= tau`.
    #[error("inner start violates the switching threshold: G(z0) = {g0:e} > tau = {tau:e}")]
    InfeasibleInnerStart { g0: f64, tau: f64 },

    /// A test-instance lookup used an id that names no catalog entry.
    #[error("unknown test instance id {0:?} (expected quad1d, quad2d, or unbounded)")]
    UnknownInstanceId(String),

    /// A serialized instance document failed to parse.
    #[error("malformed instance document: {0}")]
    MalformedInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
