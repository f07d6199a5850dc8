use thiserror::Error;

use crate::model::Violation;

/// Errors raised while constructing domain types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
    #[error("material {material}: density must be > 0")]
    NonPositiveDensity { material: String },
    #[error("interaction range must be positive and finite, got {0}")]
    NonPositiveLambda(f64),
    #[error("mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),
    #[error("{0}")]
    Invalid(Violation),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("infeasible geometry: {}", join(.0))]
    Infeasible(Vec<Violation>),
    #[error("argument {name} = {value} outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("unsupported Bessel order {0} (only 0 and 1)")]
    UnsupportedOrder(u32),
    #[error("quadrature did not converge: estimate {value:e}, error {error:e} after {evaluations} evaluations")]
    NoConvergence {
        value: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("lambda = {0:e} m is outside the line span [{1:e}, {2:e}] m")]
    OutOfSpan(f64, f64, f64),
    #[error("constraint lines do not overlap in lambda")]
    DisjointSpans,
    #[error("invalid constraint line: {0}")]
    InvalidLine(String),
    #[error("no finite constraint at lambda = {0:e} m (zero lateral signal)")]
    Unconstrained(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("infeasible optimization bounds: {0}")]
    InfeasibleBounds(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
