//! Small dense complex linear algebra: products, Kronecker products,
//! Hermitian spectra, partial traces and partial transposes.

mod eigen;
mod matrix;
mod subsystem;

pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, is_psd, HermitianEigen, HermitianSpectrum, PsdCheck,
    HERMITIAN_TOL, PSD_TOL,
};
pub use matrix::ComplexMatrix;
pub use subsystem::{partial_trace, partial_transpose, reduce_two_qubit, Subsystem};

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}
