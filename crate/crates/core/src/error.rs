use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular system: no usable pivot at row {row}")]
    Singular { row: usize },

    #[error("linear solve inaccurate: relative residual {residual:.3e} (worst row {row})")]
    Inaccurate { residual: f64, row: usize },

    #[error("Picard iteration did not converge in {iterations} iterations (last relative increment {increment:.3e})")]
    PicardDivergence { iterations: usize, increment: f64 },

    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("study level {level} failed: {source}")]
    Level {
        level: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
