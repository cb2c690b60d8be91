use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate rotation: {0}")]
    Degenerate(String),

    #[error("absolute continuity violated: target density positive at x = {x} where the base density vanishes")]
    AbsoluteContinuity { x: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("basis is not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Config(_) | Error::Io(_) => {
                true
            }
            Error::Replication { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
