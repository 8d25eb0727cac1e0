use std::fmt;

/// Line/column of a syntax error, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("PENMAN parse error at {pos}: {msg}")]
    Penman { pos: Position, msg: String },
    #[error("tree parse error at column {column}: {msg}")]
    Tree { column: usize, msg: String },
    #[error("alignment format error on line {line}: {msg}")]
    Pharaoh { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("model file error on line {line}: {msg}")]
    Model { line: usize, msg: String },
    #[error("sentence fully filtered")]
    FullyFiltered,
    #[error("index {index} outside provenance map of length {len}")]
    OutOfDomain { index: usize, len: usize },
    #[error("link ({src}, {tgt}) outside {src_len}x{tgt_len} alignment matrix")]
    Dimension {
        src: usize,
        tgt: usize,
        src_len: usize,
        tgt_len: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("data mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
