use thiserror::Error;

use crate::geometry::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite Fourier coefficient at index {index}")]
    NonFiniteCoefficient { index: usize },

    #[error("domain is not admissible: {}", format_violations(.0))]
    Inadmissible(Vec<Violation>),

    #[error("degenerate triangle {triangle} (signed area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("field length {got} does not match mesh node count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("Dirichlet constraint set is empty")]
    EmptyConstraintSet,

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("non-positive curvature {curvature:e} at iteration {iteration}; matrix is not positive definite")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("eigenvalue iteration stagnated after {iterations} iterations (last change {change:e})")]
    EigenStagnation { iterations: usize, change: f64 },

    #[error("perturbing shape coefficient {coefficient} by {step:e} leaves the admissible set")]
    PerturbationInadmissible { coefficient: usize, step: f64 },

    #[error("no violation of the boxed bound in the scaling grid (Sigma trace norm {trace_norm:e})")]
    NoViolation { trace_norm: f64 },

    #[error("inequality link `{link}` violated: relative slack {relative_slack:e}")]
    SlackViolation { link: String, relative_slack: f64 },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
