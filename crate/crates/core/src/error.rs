use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes shared by every module. The CLI maps each class onto a
/// fixed exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("atom {0} has zero trace")]
    DegenerateAtom(usize),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("moment data is not positive: smallest eigenvalue {0:e}")]
    Positivity(f64),

    #[error("family is not a valid SU-set: {0}")]
    NotCommuting(String),

    #[error("family is not cyclic: {0}")]
    NonCyclic(String),

    #[error("model map is not well defined: residual {0:e}")]
    WellDefinedness(f64),

    #[error("parse error: {0}")]
    Parse(String),
}
