use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the sampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("not Hermitian: max |rho_jk - conj(rho_kj)| = {0:e}")]
    NotHermitian(f64),

    #[error("trace is not one (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite: minimum eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("Jacobian is rank deficient at this parameter point")]
    SingularJacobian,

    #[error("gradient is not finite: probability {index} is zero")]
    ZeroProbability { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown POVM `{0}`")]
    UnknownPovm(String),

    #[error("unknown sample family `{0}`")]
    UnknownFamily(String),

    #[error("{0} is not supported for POVM `{1}`")]
    UnsupportedPovm(&'static str, String),

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("invalid weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("fiber estimate has no hits in {draws} draws at half-width {delta}; enlarge the bin or the draw count")]
    NoHits { draws: usize, delta: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("refusing to overwrite existing file {0}")]
    WouldOverwrite(PathBuf),

    #[error("{path}:{line}: malformed number `{token}`")]
    MalformedNumber {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("row count mismatch: real file has {re_rows} rows, imaginary file has {im_rows}")]
    RowCountMismatch { re_rows: usize, im_rows: usize },

    #[error("row {row}: real part has {re_len} entries, imaginary part has {im_len}")]
    RowLengthMismatch {
        row: usize,
        re_len: usize,
        im_len: usize,
    },

    #[error("row {row}: {len} entries is not a square matrix of dimension {d}")]
    NotSquare { row: usize, len: usize, d: usize },

    #[error("row {row}: invalid state ({reason}); minimum eigenvalue {min_eigenvalue:e}")]
    InvalidRow {
        row: usize,
        reason: String,
        min_eigenvalue: f64,
    },

    #[error("weights file has {found} entries for {expected} states")]
    WeightCountMismatch { expected: usize, found: usize },

    #[error("metadata: {0}")]
    Metadata(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::SingularJacobian
                | Error::ZeroProbability { .. }
                | Error::NoHits { .. }
                | Error::NotPositive(_)
                | Error::NotHermitian(_)
                | Error::InvalidTrace(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
