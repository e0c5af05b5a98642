use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H†| entry = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("basis is not orthonormal: max |G - I| entry = {max_deviation:e}")]
    NotOrthonormal { max_deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed on a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("invalid interval boundaries: {0}")]
    InvalidIntervals(String),

    #[error("efficiency {0} outside [0, 1]")]
    InvalidEfficiency(f64),

    #[error("root isolation failed for polynomial of degree {degree}")]
    RootIsolation { degree: usize },

    #[error("inequality file line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every seed produced a non-finite objective")]
    AllSeedsFailed,

    #[error("local optimizer: {0}")]
    Optimizer(String),

    #[error("score still growing at the bin cap q = {cap}")]
    BinGrowthCap { cap: usize },

    #[error("herald probability {probability:e} below 1e-12")]
    DegenerateHerald { probability: f64 },

    #[error("every circuit seed produced a degenerate herald; rescale squeezing or displacement ranges")]
    AllHeraldsDegenerate,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
