use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("input vector is zero")]
    ZeroInput,
    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("factor {index} is singular (|det| = {det:e})")]
    SingularFactor { index: usize, det: f64 },
    #[error("non-unitary matrix: {0}")]
    NonUnitary(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
