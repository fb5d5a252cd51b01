use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: shape {left_rows}x{left_cols} does not match {right_rows}x{right_cols}")]
    ShapeMismatch { what: &'static str, left_rows: usize, left_cols: usize, right_rows: usize, right_cols: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("division by zero: {0}")]
    DivideByZero(&'static str),

    #[error("rank {rank} exceeds min(d, n) = {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("mask entry {value} at position {index} is not 0 or 1")]
    NonBinaryMask { index: usize, value: u8 },
}

impl Error {
    pub(crate) fn shape(what: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::ShapeMismatch { what, left_rows: left.0, left_cols: left.1, right_rows: right.0, right_cols: right.1 }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}
