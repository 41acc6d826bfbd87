//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch in {context}: expected {expected}, got {got}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("singular prototype: |spectrum| = {magnitude:.3e} at subcarrier {subcarrier}, bin {bin}")]
    SingularPrototype {
        subcarrier: usize,
        bin: usize,
        magnitude: f64,
    },

    #[error("rank-deficient system at subcarrier {k}, block {m}")]
    RankDeficient { k: usize, m: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors arising from numerical breakdown at run time, as
    /// opposed to bad configuration or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::SingularPrototype { .. }
                | Error::RankDeficient { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
