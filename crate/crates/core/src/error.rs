use thiserror::Error;

/// Errors surfaced by validation, numerical kernels, and threshold scans.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {dev:.3e}, tolerance {tol:.3e})")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("matrix is not unitary (max deviation {dev:.3e}, tolerance {tol:.3e})")]
    NotUnitary { dev: f64, tol: f64 },

    #[error("trace is {trace:.17} but must be 1 within {tol:.3e}")]
    BadTrace { trace: f64, tol: f64 },

    #[error("state norm is {norm:.17} but must be 1 within {tol:.3e}")]
    BadNorm { norm: f64, tol: f64 },

    #[error("eigenvalue {0:.3e} is below the clip floor; the state that produced it is invalid")]
    NegativeEigenvalue(f64),

    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the cap {cap} for {context}")]
    DimensionCap {
        dim: usize,
        cap: usize,
        context: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("pointer index {index} out of range for {dim} pointer values")]
    PointerIndex { index: usize, dim: usize },

    #[error("insufficient environment: {0}")]
    InsufficientEnvironment(String),

    #[error("fit window: {0}")]
    FitWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
