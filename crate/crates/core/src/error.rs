use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::expr::{BindError, EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Bind(#[from] BindError),

    #[error("{source} at point {point:?}")]
    Eval { point: Vec<f64>, source: EvalError },

    #[error("structure is degenerate at {point:?}: rank {rank} < {dim}")]
    Degenerate {
        rank: usize,
        dim: usize,
        point: Vec<f64>,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("integration aborted at t = {t}: {source}")]
    Integration {
        t: f64,
        state: Vec<f64>,
        partial: Box<Trajectory>,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn dimension(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what: what.into(),
            expected,
            found,
        }
    }
}
