use num_complex::Complex64;
use serde::Serialize;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// One factor of a two-factor tensor product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::First => Subsystem::Second,
            Subsystem::Second => Subsystem::First,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Subsystem::First => 0,
            Subsystem::Second => 1,
        }
    }
}

fn unravel(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = idx % d;
        idx /= d;
    }
}

fn ravel(digits: impl Iterator<Item = (usize, usize)>) -> usize {
    digits.fold(0, |acc, (digit, dim)| acc * dim + digit)
}

/// Traces out every factor not listed in `keep`. `dims` gives the factor
/// dimensions in tensor order; `keep` must be strictly ascending.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "factor dims {dims:?} (product {total}) for a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "kept factors {keep:?} must be ascending indices into {dims:?}"
        )));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);

    let mut row_digits = vec![0; dims.len()];
    let mut col_digits = vec![0; dims.len()];
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    for i in 0..total {
        unravel(i, dims, &mut row_digits);
        for j in 0..total {
            unravel(j, dims, &mut col_digits);
            if traced.iter().any(|&k| row_digits[k] != col_digits[k]) {
                continue;
            }
            let r = ravel(keep.iter().map(|&k| (row_digits[k], dims[k])));
            let c = ravel(keep.iter().map(|&k| (col_digits[k], dims[k])));
            out[(r, c)] += m[(i, j)];
        }
    }
    Ok(out)
}

/// Reduced state of one qubit of a two-qubit matrix.
pub fn reduce_two_qubit(m: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    partial_trace(m, &[2, 2], &[keep.index()])
}

/// Transposes the chosen factor of a 4x4 matrix on C²⊗C².
pub fn partial_transpose(m: &ComplexMatrix, side: Subsystem) -> Result<ComplexMatrix> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "partial transpose needs a 4x4 matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    // element ⟨a b| m |c d⟩
                    let v: Complex64 = m[(2 * a + b, 2 * c + d)];
                    let (r, col) = match side {
                        Subsystem::First => (2 * c + b, 2 * a + d),
                        Subsystem::Second => (2 * a + d, 2 * c + b),
                    };
                    out[(r, col)] = v;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::{hermitian_eigenvalues, is_psd, PSD_TOL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        ComplexMatrix::outer(&psi, &psi)
    }

    #[test]
    fn product_state_factorizes() {
        let rho =
            ComplexMatrix::from_rows(&[[c(0.6, 0.0), c(0.1, 0.2)], [c(0.1, -0.2), c(0.4, 0.0)]]);
        let sigma =
            ComplexMatrix::from_rows(&[[c(2.0, 0.0), c(0.0, 0.5)], [c(0.0, -0.5), c(1.0, 0.0)]]);
        let joint = rho.kron(&sigma);
        let reduced = partial_trace(&joint, &[2, 2], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&rho.scale_re(3.0)) < 1e-15);
        let other = partial_trace(&joint, &[2, 2], &[1]).unwrap();
        assert!(other.max_abs_diff(&sigma) < 1e-15);
    }

    #[test]
    fn schmidt_state_reduces_to_diagonal() {
        let (a, b) = ((1.0_f64 / 3.0).sqrt(), (2.0_f64 / 3.0).sqrt());
        let psi = [c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)];
        let rho = ComplexMatrix::outer(&psi, &psi);
        let rx = reduce_two_qubit(&rho, Subsystem::First).unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[1.0 / 3.0, 2.0 / 3.0]);
        assert!(rx.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn partial_trace_three_factors() {
        let a = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        let b = ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.7]);
        let cc = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        let m = a.kron(&b).kron(&cc);
        let ac = partial_trace(&m, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(ac.max_abs_diff(&a.kron(&cc)) < 1e-15);
        let none = partial_trace(&m, &[2, 3, 2], &[]).unwrap();
        assert_eq!(none.rows(), 1);
        assert!((none[(0, 0)] - m.trace()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_dimension_errors() {
        let m = ComplexMatrix::identity(4);
        assert!(partial_trace(&m, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[1, 0]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let rho =
            ComplexMatrix::from_rows(&[[c(0.6, 0.0), c(0.1, 0.2)], [c(0.1, -0.2), c(0.4, 0.0)]]);
        let sigma =
            ComplexMatrix::from_rows(&[[c(0.3, 0.0), c(0.2, -0.1)], [c(0.2, 0.1), c(0.7, 0.0)]]);
        let pt = partial_transpose(&rho.kron(&sigma), Subsystem::Second).unwrap();
        assert!(pt.max_abs_diff(&rho.kron(&sigma.transpose())) < 1e-16);
        assert!(is_psd(&pt, PSD_TOL).unwrap().psd);
        let pt1 = partial_transpose(&rho.kron(&sigma), Subsystem::First).unwrap();
        assert!(pt1.max_abs_diff(&rho.transpose().kron(&sigma)) < 1e-16);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        for side in [Subsystem::First, Subsystem::Second] {
            let pt = partial_transpose(&bell(), side).unwrap();
            let s = hermitian_eigenvalues(&pt).unwrap();
            let want = [-0.5, 0.5, 0.5, 0.5];
            for (g, w) in s.eigenvalues().iter().zip(want) {
                assert!((g - w).abs() < 1e-14);
            }
            let chk = is_psd(&pt, PSD_TOL).unwrap();
            assert!(!chk.psd);
            assert!((chk.min_eigenvalue + 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_transpose_rejects_wrong_size() {
        assert!(partial_transpose(&ComplexMatrix::identity(3), Subsystem::First).is_err());
    }
}
