use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace {trace:.12} differs from 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not Bell-diagonal up to local phases: {0}")]
    NotBellDiagonal(String),

    #[error("state is not of X form (max off-X entry {max_entry:.3e})")]
    NotXState { max_entry: f64 },

    #[error("unphysical correlation vector ({d1}, {d2}, {d3})")]
    UnphysicalCorrelations { d1: f64, d2: f64, d3: f64 },

    #[error("no sudden-death onset: state is never entangled for p = {p}")]
    NeverEntangled { p: f64 },

    #[error("integrator step too coarse: dt*(n_max+1) = {product:.4} exceeds {limit}")]
    StepTooCoarse { product: f64, limit: f64 },

    #[error("Fock truncation too small: retained coherent-state mass {mass:.3e} short of 1 by more than {tolerance:e}")]
    TruncationTooSmall { mass: f64, tolerance: f64 },

    #[error("raw cavity parameters are required for this diagnostic")]
    MissingRawParams,

    #[error("no data to write")]
    EmptyData,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
