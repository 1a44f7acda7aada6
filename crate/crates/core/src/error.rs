use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate term: {0}")]
    DegenerateTerm(String),
    #[error("term is a pure power and cannot be shuffled out: {0}")]
    NotReducible(String),
    #[error("degenerate basepoint split: {0}")]
    DegenerateSplit(String),
    #[error("degenerate cross-ratio: {0}")]
    DegenerateCrossRatio(String),
    #[error("divergent multiple polylogarithm: {0}")]
    Divergent(String),
    #[error("zero argument in {0}")]
    ZeroArgument(String),
    #[error("tensor has mixed weights {0} and {1}")]
    MixedWeights(usize, usize),
    #[error("weight {0} too small for this operation")]
    WeightTooSmall(usize),
    #[error("specialization is not generic: {0}")]
    RedrawRequired(String),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
