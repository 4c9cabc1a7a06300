use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown value `{value}` for variable `{variable}`")]
    UnknownValue { variable: String, value: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("parent graph has a cycle through `{0}`")]
    Cycle(String),

    #[error("parent index {parent} of variable {child} is out of range")]
    ParentOutOfRange { child: usize, parent: usize },

    #[error("variable `{variable}` has no training rows for parent configuration {config} and alpha = 0")]
    UndefinedRow { variable: String, config: usize },

    #[error("variable `{0}` is both inferred and observed")]
    InferObservedOverlap(String),

    #[error("evidence has zero probability under the model")]
    ImpossibleEvidence,

    #[error("joint state space of {size} exceeds the enumeration cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("no gesture model can score the input (all likelihoods are zero)")]
    Unscoreable,

    #[error("the action variable cannot be observed when fusing gesture evidence")]
    ActionObserved,

    #[error("grammar error: {0}")]
    Grammar(String),

    #[error("word `{0}` is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported format: {0}")]
    Format(String),
}
