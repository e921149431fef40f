use thiserror::Error;

/// Errors produced by the engine. Probability-level problems (rows that do
/// not normalize, negative entries) are reported through validation reports,
/// not through this type; `Error` covers structural misuse.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size cap exceeded: {got} cells > {cap}")]
    SizeCap { got: usize, cap: usize },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("variable sets overlap on {0}")]
    OverlappingVarSets(String),

    #[error("cannot degenerate {0}: only auxiliary variables may be degenerated")]
    NotAuxiliary(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
