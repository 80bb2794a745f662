use std::fmt;

use thiserror::Error;

use crate::rules::Rectangle;

/// Errors raised by the quadrature drivers, the integrands and the benchmark harness.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The integrand produced a non-finite value.
    #[error("integrand{} returned {value} at ({x}, {y})", MemberTag(*member))]
    EvaluationFailure {
        member: Option<usize>,
        x: f64,
        y: f64,
        value: f64,
    },

    /// A task whose domain can no longer be bisected reached the top of the heap.
    #[error(
        "integrand{} looks non-integrable: subdomain {domain} cannot be refined further (err = {err:e})",
        MemberTag(Some(*member))
    )]
    Singularity {
        member: usize,
        domain: Rectangle,
        err: f64,
    },

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for anything that went wrong
    /// while evaluating.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 2,
            _ => 3,
        }
    }

    /// Attach a member index to an evaluation failure coming out of a bare rule call.
    pub(crate) fn with_member(self, id: usize) -> Self {
        match self {
            Error::EvaluationFailure { x, y, value, .. } => Error::EvaluationFailure {
                member: Some(id),
                x,
                y,
                value,
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

struct MemberTag(Option<usize>);

impl fmt::Display for MemberTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(m) => write!(f, " #{m}"),
            None => Ok(()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
