use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("bind error: {0}")]
pub struct BindError(pub String);
