use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("empty node label")]
    EmptyLabel,

    #[error("unknown node: {0}")]
    UnknownNode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is singular")]
    Singular,

    #[error(
        "Katz series diverges: beta ({beta}) times spectral radius estimate ({radius:.6}) must be < 1"
    )]
    KatzDivergence { beta: f64, radius: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {bad} of {total} lines malformed ({percent:.2}% > 1%); first: {sample}")]
    TooManyMalformed {
        path: PathBuf,
        bad: usize,
        total: usize,
        percent: f64,
        sample: String,
    },

    #[error("dataset {dataset}: none of its {total} records resolve to embedded nodes")]
    NoCoverage { dataset: String, total: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
