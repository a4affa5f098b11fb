//! Hermitian eigensolver.
//!
//! Cyclic complex Jacobi: each pivot `(p, q)` is first rotated to a real
//! off-diagonal entry by a diagonal phase, then annihilated with a real
//! Givens rotation. Both steps are folded into one 2x2 unitary. The matrices
//! handled here are at most 64x64, so no blocking or tridiagonal reduction is
//! attempted.

use num_complex::Complex64;
use serde::Serialize;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Absolute entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default PSD tolerance, relative to `max(1, spectral radius)`.
pub const PSD_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitianSpectrum {
    eigenvalues: Vec<f64>,
}

impl HermitianSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn product(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Full eigendecomposition; `vectors` holds the normalized eigenvectors as
/// columns, in the same (ascending) order as `values`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.col(k)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolve of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITIAN_TOL || deviation.is_nan() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

fn off_diagonal_norm_sq(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Applies `A <- U† A U` and `V <- V U` for the 2x2 unitary `u` acting on
/// coordinates `(p, q)`; `u = [[u_pp, u_pq], [u_qp, u_qq]]`.
fn apply_rotation(
    a: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    u: [[Complex64; 2]; 2],
) {
    let n = a.rows();
    let [[upp, upq], [uqp, uqq]] = u;
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
}

fn jacobi(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm_sq(&a);
        if off.sqrt() <= 1e-300 || off.sqrt() <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip entries already negligible against both diagonals.
                if r < f64::EPSILON * 1e-2 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph = phase.conj();
                let u = [
                    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                    [-ph * s, ph * c],
                ];
                apply_rotation(&mut a, &mut v, p, q, u);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    Ok(jacobi(m))
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// before the sweep so that roundoff asymmetry below the tolerance is ignored.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    check_hermitian(m)?;
    Ok(HermitianSpectrum {
        eigenvalues: jacobi(m).values,
    })
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdCheck {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// PSD iff `min eigenvalue >= -tol * max(1, spectral radius)`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<PsdCheck> {
    let spectrum = hermitian_eigenvalues(m)?;
    let min_eigenvalue = spectrum.min();
    let bound = tol * spectrum.spectral_radius().max(1.0);
    Ok(PsdCheck {
        psd: min_eigenvalue >= -bound,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_density() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        ComplexMatrix::outer(&psi, &psi)
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let m = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(
            hermitian_eigenvalues(&m).unwrap().eigenvalues(),
            &[1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn bell_projector_spectrum() {
        let s = hermitian_eigenvalues(&bell_density()).unwrap();
        let want = [0.0, 0.0, 0.0, 1.0];
        for (got, want) in s.eigenvalues().iter().zip(want) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn two_by_two_with_complex_coupling() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m =
            ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(1.0, 0.0)]]);
        let e = hermitian_eigen(&m).unwrap();
        assert!(e.values[0].abs() < 1e-15);
        assert!((e.values[1] - 2.0).abs() < 1e-15);
        // M v = λ v for each pair
        for k in 0..2 {
            let v = ComplexMatrix::column(&e.vector(k));
            let mv = &m * &v;
            let lv = v.scale_re(e.values[k]);
            assert!(mv.max_abs_diff(&lv) < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn tolerates_sub_threshold_asymmetry() {
        let m =
            ComplexMatrix::from_rows(&[[c(1.0, 0.0), c(0.5, 1e-12)], [c(0.5, 0.0), c(1.0, 0.0)]]);
        let s = hermitian_eigenvalues(&m).unwrap();
        assert!((s.min() - 0.5).abs() < 1e-11);
    }

    #[test]
    fn psd_semantics() {
        let id = is_psd(&ComplexMatrix::identity(4), PSD_TOL).unwrap();
        assert!(id.psd);
        assert_eq!(id.min_eigenvalue, 1.0);

        let near = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, -1e-14]);
        let chk = is_psd(&near, 1e-10).unwrap();
        assert!(chk.psd);
        assert_eq!(chk.min_eigenvalue, -1e-14);

        let neg = ComplexMatrix::from_real_diagonal(&[1.0, -1e-3]);
        assert!(!is_psd(&neg, 1e-10).unwrap().psd);
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let m = ComplexMatrix::from_rows(&[
            [c(2.0, 0.0), c(0.3, 0.4), c(0.0, -1.0)],
            [c(0.3, -0.4), c(1.0, 0.0), c(0.2, 0.0)],
            [c(0.0, 1.0), c(0.2, 0.0), c(-1.0, 0.0)],
        ]);
        let e = hermitian_eigen(&m).unwrap();
        let gram = &e.vectors.adjoint() * &e.vectors;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-13);
        let d = ComplexMatrix::from_real_diagonal(&e.values);
        let rebuilt = &(&e.vectors * &d) * &e.vectors.adjoint();
        assert!(rebuilt.max_abs_diff(&m) < 1e-13);
    }
}
