use thiserror::Error;

pub type Result<T> = std::result::Result<T, QsrError>;

#[derive(Debug, Error)]
pub enum QsrError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl QsrError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QsrError::InvalidArgument(msg.into())
    }

    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        QsrError::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
