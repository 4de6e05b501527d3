use std::path::PathBuf;

/// Errors produced by dataset construction, configuration, I/O, and sampling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("duplicate gene id `{id}` in {modality} gene list")]
    DuplicateGeneId { id: String, modality: String },

    #[error("genotype value {value} at individual {row}, variant {col} is outside {{0,1,2}}")]
    BadGenotype { value: u8, row: usize, col: usize },

    #[error("non-finite log-posterior at initialization: {0}")]
    NonFiniteInit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("output path {0} already exists and is not empty")]
    OutputCollision(PathBuf),
}

pub type Result<T> = std::result::Result<T, Error>;
