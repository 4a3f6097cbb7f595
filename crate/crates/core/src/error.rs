use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` lists itself as a parent")]
    SelfParent(String),
    #[error("node `{0}` has an empty state shape or a zero dimension")]
    EmptyShape(String),
    #[error("directed cycle through node `{0}`")]
    CycleDetected(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("net has {stories} stories, more than the cap of {cap}")]
    StoryCapExceeded { stories: u128, cap: u64 },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("empty entropy expression")]
    EmptyExpression,
    #[error("too many distinct variables in expression ({0})")]
    TooManyVariables(usize),
    #[error("value {0} outside the domain [0, 1]")]
    Domain(f64),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),
    #[error("reduction leaves no axes")]
    EmptyResult,
    #[error("normalization constant {0:e} is below the cutoff")]
    ZeroProbability(f64),
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("matrix has a negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("state is not normalized (trace or norm {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("matrix of dimension {0} is too large for a dense density matrix")]
    TooLarge(usize),

    #[error("probability query needs a nonempty node set")]
    EmptyGamma,
    #[error("conditioning event has probability {0:e}")]
    ZeroDenominator(f64),

    #[error("invalid POM: {0}")]
    InvalidPom(String),
    #[error("orthonormal completion failed after {0} columns")]
    NotUnitarizable(usize),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("not a Markov chain: {0}")]
    NotAChain(String),

    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
