use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("rate {0} is not strictly positive")]
    InvalidRate(f64),

    #[error("step {dt:e} exceeds the limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("invalid integration options: {0}")]
    InvalidOptions(String),

    #[error("invalid time interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },

    #[error("unknown loss channel `{0}`")]
    InvalidChannel(String),

    #[error("truncation residual {residual:e} exceeds tolerance {tolerance:e}; n_max = {n_max} is too small")]
    TruncationResidual {
        residual: f64,
        tolerance: f64,
        n_max: usize,
    },

    #[error("excited population {0:e} remains at the integration horizon")]
    HorizonTooShort(f64),

    #[error("mean photon number is zero; g2 is undefined")]
    ZeroMeanPhotonNumber,

    #[error("corrected side-peak area {0:e} is not resolved above background; g2 is undefined")]
    UndefinedG2(f64),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
