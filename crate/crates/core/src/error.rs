use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at offset {offset}")]
    Lexical { offset: usize, ch: char },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lexical { offset, .. }
            | ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("point has dimension {got}, chart has dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("derived field needs more than two derivative orders")]
    DerivativeOrder,
    #[error("matrix is singular at the sample point")]
    Singular,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("check not applicable: {0}")]
    NotApplicable(String),
    #[error("degree {degree} exceeds the supported bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("expression error at {path}: {source}")]
    Expression { path: String, source: ParseError },
    #[error("index error at {path}: {message}")]
    Index { path: String, message: String },
    #[error("entry {path} contradicts {other}")]
    Contradiction { path: String, other: String },
    #[error("suite `{suite}` needs the `{field}` block")]
    MissingBlock { suite: String, field: String },
}
