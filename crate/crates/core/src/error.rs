use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero function")]
    DivisionByZero,
    #[error("pole at the given binding")]
    Pole,
    #[error("unbound symbol {0}")]
    UnboundSymbol(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("expression grows without bound as t → ∞")]
    Unbounded,
    #[error("non-diagonalizable block: coupled basis elements share the rate {0}")]
    NonDiagonalizable(String),
    #[error("vertex bound exceeded: {0} > {max}", max = crate::basis::MAX_VERTICES)]
    TooManyVertices(usize),
    #[error("invalid vertices {0} and {1}")]
    InvalidVertices(usize, usize),
    #[error("incompatible graphs: {0}")]
    Incompatible(String),
    #[error("basis not closed: {0} is missing")]
    NotClosed(String),
    #[error("zero diagonal entry for {0}")]
    ZeroDiagonal(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("slice saturated: {lines} lines still present at depth {eps} (raise n0)")]
    Saturated { eps: f64, lines: usize },
    #[error("{0} undefined: no pair within range")]
    Undefined(&'static str),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("path integrals need a stationary start")]
    NotStationary,
}

pub type Result<T> = std::result::Result<T, Error>;
