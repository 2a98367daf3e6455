use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("argument {value} outside domain: {what}")]
    OutOfDomain { what: String, value: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("function is not non-decreasing near log r = {ln_r}")]
    NonMonotone { ln_r: f64 },
    #[error("function is not positive at log r = {ln_r}")]
    NonPositive { ln_r: f64 },
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
