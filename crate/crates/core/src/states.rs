//! Two-qubit pure and mixed states, single-qubit Bloch vectors and a seeded
//! sampler for test corpora.
//!
//! Mixed states are sampled as `G G† / Tr(G G†)` with `G` a 4x4 matrix of
//! i.i.d. standard complex Gaussians (Hilbert–Schmidt measure). Pure states
//! are normalized complex Gaussian 4-vectors, which is Haar-uniform on the
//! unit sphere of C⁴. Both use ChaCha8 seeded from the caller's `u64`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigen, is_psd, ComplexMatrix, HERMITIAN_TOL, PSD_TOL};

const NORM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;

/// Pure state `α|00⟩ + β|11⟩` with `α, β ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitPureState {
    alpha: f64,
    beta: f64,
}

impl TwoQubitPureState {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!(
                "Schmidt coefficients must lie in [0, 1], got ({alpha}, {beta})"
            )));
        }
        let norm_sq = alpha * alpha + beta * beta;
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm_sq });
        }
        Ok(Self { alpha, beta })
    }

    /// `β = √(1 − α²)`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Self::new(alpha, (1.0 - alpha * alpha).max(0.0).sqrt())
    }

    /// The state with `αβ = s` and `α ≥ β`.
    pub fn from_schmidt_product(s: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&s) {
            return Err(Error::Domain(format!(
                "alpha*beta must lie in [0, 1/2], got {s}"
            )));
        }
        let (a2, b2) = schmidt_weights(s);
        Ok(Self {
            alpha: a2.sqrt(),
            beta: b2.sqrt(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn schmidt_product(&self) -> f64 {
        (self.alpha * self.beta).clamp(0.0, 0.5)
    }

    /// Same state with the roles of α and β exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// Amplitudes in the basis |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn amplitudes(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.alpha, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(self.beta, 0.0),
        ]
    }
}

/// `(α², β²)` with `α² ≥ β²` for a given Schmidt product `s = αβ ≤ 1/2`.
pub fn schmidt_weights(s: f64) -> (f64, f64) {
    let root = (1.0 - 4.0 * s * s).max(0.0).sqrt();
    ((1.0 + root) / 2.0, (1.0 - root) / 2.0)
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-12) and PSD (1e-10).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotDensityMatrix(format!(
                "{}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::NotDensityMatrix("non-finite entries".into()));
        }
        if !m.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotDensityMatrix(format!(
                "not Hermitian (deviation {:.3e})",
                m.hermiticity_deviation()
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!("trace {tr}")));
        }
        let chk = is_psd(&m, PSD_TOL)?;
        if !chk.psd {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                chk.min_eigenvalue
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// Maximally mixed state of dimension `n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self(ComplexMatrix::identity(n).scale_re(1.0 / n as f64))
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm_sq });
        }
        Ok(Self(ComplexMatrix::outer(psi, psi)))
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let n = first.1.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        let mut total = 0.0;
        for (w, rho) in parts {
            if *w < 0.0 || rho.dim() != n {
                return Err(Error::Domain(
                    "mixture weights must be non-negative over equal dimensions".into(),
                ));
            }
            acc = &acc + &rho.0.scale_re(*w);
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm_sq: total });
        }
        Ok(Self(acc))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Density matrix of `α|00⟩ + β|11⟩`.
pub fn pure_state_density(st: &TwoQubitPureState) -> DensityMatrix {
    DensityMatrix(ComplexMatrix::outer(&st.amplitudes(), &st.amplitudes()))
}

/// Single-qubit Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(s: [f64; 3]) -> Result<Self> {
        let v = Self(s);
        let norm = v.norm();
        if norm > 1.0 + NORM_TOL || !norm.is_finite() {
            return Err(Error::BlochNorm { norm });
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.map(|x| x * k))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `½(I + s·σ)`.
pub fn bloch_to_density(s: &BlochVector) -> DensityMatrix {
    let [x, y, z] = s.0;
    DensityMatrix(ComplexMatrix::from_rows(&[
        [
            Complex64::new((1.0 + z) / 2.0, 0.0),
            Complex64::new(x / 2.0, -y / 2.0),
        ],
        [
            Complex64::new(x / 2.0, y / 2.0),
            Complex64::new((1.0 - z) / 2.0, 0.0),
        ],
    ]))
}

/// Inverse of [`bloch_to_density`]: `sᵢ = Tr(ρ σᵢ)`.
pub fn density_to_bloch(rho: &ComplexMatrix) -> Result<BlochVector> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch vector of a {}x{} matrix",
            rho.rows(),
            rho.cols()
        )));
    }
    let off = rho[(1, 0)];
    Ok(BlochVector([
        2.0 * off.re,
        2.0 * off.im,
        (rho[(0, 0)] - rho[(1, 1)]).re,
    ]))
}

/// Spectral decomposition `ρ = Σ μᵢ |ψᵢ⟩⟨ψᵢ|`.
#[derive(Debug, Clone)]
pub struct MixedStateEnsemble {
    pub weights: Vec<f64>,
    pub components: Vec<Vec<Complex64>>,
}

impl MixedStateEnsemble {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.components.first().map_or(0, Vec::len);
        self.weights
            .iter()
            .zip(&self.components)
            .fold(ComplexMatrix::zeros(n, n), |acc, (w, psi)| {
                &acc + &ComplexMatrix::outer(psi, psi).scale_re(*w)
            })
    }
}

/// Eigen-decomposes a density matrix, keeping components of weight above
/// 1e-12, heaviest first. Degenerate eigenspaces get an arbitrary
/// orthonormal basis.
pub fn spectral_decompose(rho: &DensityMatrix) -> Result<MixedStateEnsemble> {
    let eig = hermitian_eigen(rho.matrix()).map_err(|e| Error::NotDensityMatrix(e.to_string()))?;
    let mut weights = Vec::new();
    let mut components = Vec::new();
    for k in (0..eig.values.len()).rev() {
        let w = eig.values[k];
        if w > 1e-12 {
            weights.push(w);
            components.push(eig.vector(k));
        } else if w < -PSD_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {w:.3e}"
            )));
        }
    }
    Ok(MixedStateEnsemble {
        weights,
        components,
    })
}

/// Which family [`sample_random_state`] draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateKind {
    Pure,
    Mixed,
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Normalized complex Gaussian vector of length `n`.
pub fn random_pure_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Two-qubit density matrix drawn from `kind`, deterministic in `seed`.
pub fn sample_random_state(kind: StateKind, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_state_with(kind, &mut rng)
}

pub fn sample_state_with(kind: StateKind, rng: &mut ChaCha8Rng) -> DensityMatrix {
    match kind {
        StateKind::Pure => {
            let psi = random_pure_vector(4, rng);
            DensityMatrix(ComplexMatrix::outer(&psi, &psi))
        }
        StateKind::Mixed => {
            let g = ComplexMatrix::from_vec(4, 4, (0..16).map(|_| complex_normal(rng)).collect())
                .expect("16 entries");
            let w = (&g * &g.adjoint()).hermitian_part();
            let tr = w.trace().re;
            DensityMatrix(w.scale_re(1.0 / tr))
        }
    }
}

/// Uniform point on the unit sphere.
pub fn random_unit_bloch(rng: &mut ChaCha8Rng) -> BlochVector {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return BlochVector(v.map(|x| x / n));
        }
    }
}
