use std::fmt;

use thiserror::Error;

use crate::eigen::EigenPair;
use crate::network::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Structural rule a network or boundary condition violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Symmetry,
    Loop,
    Simple,
    Weight,
    Connected,
    EmptyBoundary,
    EmptyInterior,
    BoundaryNeighbor,
    DuplicateVertex,
    BoundaryCoefficients,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Symmetry => "symmetry",
            Invariant::Loop => "no loops",
            Invariant::Simple => "simple graph",
            Invariant::Weight => "positive weights",
            Invariant::Connected => "connected",
            Invariant::EmptyBoundary => "empty boundary",
            Invariant::EmptyInterior => "empty interior",
            Invariant::BoundaryNeighbor => "boundary vertex needs an interior neighbour",
            Invariant::DuplicateVertex => "unique vertex names",
            Invariant::BoundaryCoefficients => "boundary coefficients",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error ({invariant}): {message}")]
    Validation { invariant: Invariant, message: String },

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("vertex {0} is not a boundary vertex")]
    NotBoundaryVertex(VertexId),

    #[error("exponent p must be a finite real > 1, got {0}")]
    InvalidExponent(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate boundary coefficients: all weights and b are zero")]
    DegenerateCoefficients,

    #[error("root finding failed: {0}")]
    ConvergenceFailure(String),

    #[error("state is not admissible for the Rayleigh quotient: {0}")]
    NotAdmissible(String),

    #[error(
        "eigen solver did not reach tolerance: residual {:.3e} (lambda {:.12})",
        .0.residual, .0.lambda
    )]
    EigenConvergence(Box<EigenPair>),

    #[error("quadrature failed to converge on [0, {upper}]")]
    QuadratureFailure { upper: f64 },

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("growth hypothesis fails at u = {u}: f(u) = {f} < {bound}")]
    HypothesisFailed { u: f64, f: f64, bound: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("B(0) = {0} is not positive; the blow-up bound does not apply")]
    NonpositiveB0(f64),

    #[error("t = {t} is at or beyond the envelope pole {bound}")]
    OutOfRange { t: f64, bound: f64 },

    #[error("non-finite value at vertex {vertex} (t = {t})")]
    NonFinite { vertex: VertexId, t: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn validation(invariant: Invariant, message: impl Into<String>) -> Error {
        Error::Validation {
            invariant,
            message: message.into(),
        }
    }
}
