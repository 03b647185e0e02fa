use thiserror::Error;

/// Errors raised while reading a dataset or assignment file.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: label index {index} is out of range for q = {q}")]
    LabelOutOfRange { line: usize, index: usize, q: usize },
    #[error("line {line}: label count must be a positive integer, got {value}")]
    NonPositiveCount { line: usize, value: String },
    #[error("dataset has no examples")]
    Empty,
    #[error("dataset declares no labels")]
    NoLabels,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        ParseError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// Errors raised by fold specifications and split scoring.
#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("at least one fold is required")]
    NoFolds,
    #[error("proportions must be finite and non-negative")]
    InvalidProportion,
    #[error("proportions sum to {0}, expected 1")]
    ProportionSum(f64),
    #[error("fold {fold} would receive no examples")]
    EmptyFold { fold: usize },
    #[error("fold targets sum to {actual}, dataset has {expected} examples")]
    TargetSum { expected: usize, actual: usize },
    #[error("assignment has length {actual}, dataset has {expected} examples")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("example {example} assigned to fold {fold}, only {k} folds exist")]
    FoldOutOfRange { example: usize, fold: usize, k: usize },
    #[error("fold {fold} holds {actual} examples, target is {target}")]
    SizeInfeasible { fold: usize, actual: usize, target: usize },
    #[error("crossover cut {cut} is outside 1..{len}")]
    CutOutOfRange { cut: usize, len: usize },
    #[error("mutation needs at least two folds")]
    TooFewFolds,
    #[error("{0} feasible assignments exceed the enumeration limit")]
    TooLarge(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
