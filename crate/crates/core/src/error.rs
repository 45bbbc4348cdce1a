//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("objects live on different finite spaces")]
    SpaceMismatch,

    #[error("invalid probability space: {0}")]
    InvalidSpace(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid act: {0}")]
    InvalidAct(String),

    #[error("regularity violation at outcome `{outcome}` (x = {coordinate}): {reason}")]
    RegularityViolation { outcome: String, coordinate: f64, reason: String },

    #[error("act is not measurable: it varies inside atom {atom}")]
    NotMeasurable { atom: usize },

    #[error("event is not a union of atoms of the partition")]
    EventNotInAlgebra,

    #[error("enumeration cap exceeded: {what} = {actual} > {cap}")]
    ComplexityCapExceeded { what: &'static str, actual: usize, cap: usize },

    #[error("bisection could not bracket target {target} on [{lo}, {hi}]; the functional is not strictly monotone")]
    BisectionBracketFailure { target: f64, lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("set-functional oracle does not declare property {0}")]
    PropertyFlagMissing(&'static str),

    #[error("x = {x} lies outside the dyadic grid range [-{bound}, {bound}]")]
    OutOfGridRange { x: f64, bound: f64 },

    #[error("continuity violation: outcome `{outcome}` has positive weight {weight} and a jump at x = {location}")]
    ContinuityViolation { outcome: String, weight: f64, location: f64 },

    #[error("generalized inverse left the image interval at outcome {outcome} (value {value})")]
    NonFiniteSolution { outcome: usize, value: f64 },

    #[error("invalid dyadic grid: {0}")]
    InvalidGrid(String),
}
