use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m_ij - conj(m_ji)| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized: alpha^2 + beta^2 = {norm_sq}")]
    Normalization { norm_sq: f64 },

    #[error("Bloch vector has norm {norm} > 1")]
    BlochNorm { norm: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error(
        "machine Gram matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})"
    )]
    InfeasibleMachine { min_eigenvalue: f64 },

    #[error(
        "reduced input state on the {side} subsystem is maximally mixed; shrink factor undefined"
    )]
    DegenerateInput { side: &'static str },

    #[error("parameter out of domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
