use thiserror::Error;

use crate::grid::Axis;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Solver,
    Invariance,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("marking array is not a permutation: {0}")]
    NotPermutation(String),
    #[error("X and O share the cell in column {0}")]
    SharedCell(usize),
    #[error("X and O share the cell in row {0}")]
    RowClash(usize),
    #[error("diagram has {0} components, expected a knot")]
    MultiComponentLink(usize),
    #[error("illegal commutation of {axis:?} {index} and its neighbour: spans interleave")]
    IllegalCommutation { axis: Axis, index: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("vertical and horizontal incidence differ at (i={i}, a={a}, j={j}, b={b})")]
    IncidenceMismatch { i: usize, a: usize, j: usize, b: usize },
    #[error("rectangle from generator {from} to {to} changes the Alexander grading")]
    GradingViolation { from: usize, to: usize },
    #[error("composite class from {from} to {to} has {size} decompositions")]
    CompositeClassSize { from: usize, to: usize, size: usize },
    #[error("sign system is inconsistent")]
    Inconsistent,
    #[error("d^2 is nonzero from generator {from} to {to} (coefficient {value})")]
    DSquaredNonzero { from: usize, to: usize, value: i64 },
    #[error("sign not determined: {0}")]
    UnderdeterminedSign(String),
    #[error("chain map identity fails: {0}")]
    ChainMapViolation(String),
    #[error("Q function inconsistent: {0}")]
    QInconsistent(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotPermutation(_) | SharedCell(_) | RowClash(_) | MultiComponentLink(_)
            | IllegalCommutation { .. } | Parse(_) | Unsupported(_) => ErrorClass::Validation,
            CompositeClassSize { .. } | Inconsistent | DSquaredNonzero { .. }
            | UnderdeterminedSign(_) => ErrorClass::Solver,
            ChainMapViolation(_) | QInconsistent(_) => ErrorClass::Invariance,
            IncidenceMismatch { .. } | GradingViolation { .. } | Internal(_) => ErrorClass::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
