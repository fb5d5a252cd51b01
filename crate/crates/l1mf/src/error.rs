use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: line {line}, column {col}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, col: usize, msg: String },

    #[error("{}: line {line} has {found} fields, expected {expected}", path.display())]
    Ragged { path: PathBuf, line: u64, expected: usize, found: usize },

    #[error("shape mismatch: {what} is {}x{} but {other} is {}x{}", left.0, left.1, right.0, right.1)]
    ShapeMismatch { what: &'static str, left: (usize, usize), other: &'static str, right: (usize, usize) },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Core(#[from] l1mf_core::Error),

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit status for this error: 4 for filesystem failures, 2 for
    /// everything the caller could have fixed by changing its input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            col: err.field() + 1,
            msg: "field is not valid UTF-8".to_string(),
        },
        other => Error::Parse { path: path.to_path_buf(), line, col: 0, msg: format!("{other:?}") },
    }
}
