//! One local disentangling machine.
//!
//! A machine acts on a single qubit `j` together with a 4-dimensional machine
//! register:
//!
//! ```text
//! |0⟩|M⟩ -> m0 |0⟩|M0⟩ + m1 |1⟩|M1⟩
//! |1⟩|M⟩ -> m0t|0⟩|M0t⟩ + m1t|1⟩|M1t⟩
//! ```
//!
//! The coefficients are fixed by the reduction factor `eta`; the overlaps of
//! the four machine states are fixed by `eta` and the free parameter `lambda`
//! (the imaginary overlap `Im⟨M0|M0t⟩`). All coefficients are taken real and
//! non-negative, which makes `⟨M0|M0t⟩ = iλ` and `⟨M1|M1t⟩ = -iλ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigenvalues, partial_trace, ComplexMatrix};

/// Dimension of the machine register.
pub const MACHINE_DIM: usize = 4;

/// PSD tolerance used for Gram feasibility and the pivoted factorization.
pub const GRAM_TOL: f64 = 1e-10;

/// Index of each machine state in a [`MachineGram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineState {
    M0 = 0,
    M1 = 1,
    M0Tilde = 2,
    M1Tilde = 3,
}

/// `(η, λ)` parameterization of a local machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MachineConfig {
    eta: f64,
    lambda: f64,
}

impl MachineConfig {
    pub fn new(eta: f64, lambda: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
        }
        if !(-1.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!(
                "lambda must lie in [-1, 1], got {lambda}"
            )));
        }
        Ok(Self { eta, lambda })
    }

    /// The identity machine (`η = 1`, `λ = 0`).
    pub fn identity() -> Self {
        Self {
            eta: 1.0,
            lambda: 0.0,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn m0(&self) -> f64 {
        ((1.0 + self.eta) / 2.0).sqrt()
    }

    pub fn m1(&self) -> f64 {
        ((1.0 - self.eta) / 2.0).sqrt()
    }

    pub fn m0_tilde(&self) -> f64 {
        ((1.0 - self.eta) / 2.0).sqrt()
    }

    pub fn m1_tilde(&self) -> f64 {
        ((1.0 + self.eta) / 2.0).sqrt()
    }

    /// `Λ = λ √((1 − η²)/4)`, the weighted imaginary overlap that enters the
    /// two-qubit output.
    pub fn scaled_lambda(&self) -> f64 {
        scaled_lambda(self.eta, self.lambda)
    }

    /// Overlap `⟨M1t|M0⟩ = 2η/(1+η)`.
    pub fn cross_overlap(&self) -> f64 {
        2.0 * self.eta / (1.0 + self.eta)
    }
}

/// `λ √((1 − η²)/4)`.
pub fn scaled_lambda(eta: f64, lambda: f64) -> f64 {
    lambda * ((1.0 - eta * eta) / 4.0).max(0.0).sqrt()
}

/// Inner products among `(M0, M1, M0t, M1t)`: `g[(i, j)] = ⟨i|j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineGram {
    g: ComplexMatrix,
}

impl MachineGram {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn overlap(&self, a: MachineState, b: MachineState) -> Complex64 {
        self.g[(a as usize, b as usize)]
    }
}

/// Gram matrix demanded by unitarity, orthogonality and isotropy of the
/// single-qubit reduced output.
pub fn build_gram(cfg: &MachineConfig) -> MachineGram {
    use MachineState::*;
    let mut g = ComplexMatrix::identity(MACHINE_DIM);
    let mut set = |a: MachineState, b: MachineState, v: Complex64| {
        g[(a as usize, b as usize)] = v;
        g[(b as usize, a as usize)] = v.conj();
    };
    let lam = cfg.lambda();
    set(M0, M0Tilde, Complex64::new(0.0, lam));
    set(M1, M1Tilde, Complex64::new(0.0, -lam));
    set(M1Tilde, M0, Complex64::new(cfg.cross_overlap(), 0.0));
    MachineGram { g }
}

/// Whether a Gram matrix is realizable by actual vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramFeasibility {
    pub feasible: bool,
    pub min_eigenvalue: f64,
}

pub fn gram_feasible(g: &MachineGram, tol: f64) -> GramFeasibility {
    let spectrum =
        hermitian_eigenvalues(&g.g).expect("Gram matrices are Hermitian by construction");
    let min_eigenvalue = spectrum.min();
    GramFeasibility {
        feasible: min_eigenvalue >= -tol,
        min_eigenvalue,
    }
}

/// Shorthand for `gram_feasible(&build_gram(cfg), GRAM_TOL).feasible`.
pub fn is_feasible(cfg: &MachineConfig) -> bool {
    gram_feasible(&build_gram(cfg), GRAM_TOL).feasible
}

/// Explicit machine states and the isometry `qubit -> qubit ⊗ machine`.
#[derive(Debug, Clone)]
pub struct MachineRealization {
    cfg: MachineConfig,
    vectors: [Vec<Complex64>; 4],
    isometry: ComplexMatrix,
}

impl MachineRealization {
    /// Assembles a realization from given machine vectors without checking
    /// any constraint.
    pub fn from_parts(cfg: MachineConfig, vectors: [Vec<Complex64>; 4]) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != MACHINE_DIM) {
            return Err(Error::DimensionMismatch(format!(
                "machine vectors must have length {MACHINE_DIM}"
            )));
        }
        let isometry = assemble_isometry(&cfg, &vectors);
        Ok(Self {
            cfg,
            vectors,
            isometry,
        })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    pub fn vector(&self, which: MachineState) -> &[Complex64] {
        &self.vectors[which as usize]
    }

    /// 8x2 matrix; row index is `qubit * 4 + machine`.
    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    /// Gram matrix of the realized machine states.
    pub fn realized_gram(&self) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                g[(i, j)] = inner(&self.vectors[i], &self.vectors[j]);
            }
        }
        g
    }

    /// Single-qubit channel `ρ -> Tr_M[V ρ V†]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch(
                "single-qubit channel needs a 2x2 input".into(),
            ));
        }
        let v = &self.isometry;
        let big = &(v * rho) * &v.adjoint();
        partial_trace(&big, &[2, MACHINE_DIM], &[0])
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn assemble_isometry(cfg: &MachineConfig, vectors: &[Vec<Complex64>; 4]) -> ComplexMatrix {
    use MachineState::*;
    let mut v = ComplexMatrix::zeros(2 * MACHINE_DIM, 2);
    let terms = [
        (0, 0, cfg.m0(), M0),
        (0, 1, cfg.m1(), M1),
        (1, 0, cfg.m0_tilde(), M0Tilde),
        (1, 1, cfg.m1_tilde(), M1Tilde),
    ];
    for (input, out_qubit, coeff, state) in terms {
        for (k, z) in vectors[state as usize].iter().enumerate() {
            v[(out_qubit * MACHINE_DIM + k, input)] += z * coeff;
        }
    }
    v
}

/// Pivoted Cholesky `G ≈ L L†` that stops once the residual diagonal drops
/// below `tol`. Returns the rows of `L`; row `i` has length `n` and is zero
/// beyond the numerical rank.
fn pivoted_cholesky(g: &ComplexMatrix, tol: f64) -> Vec<Vec<Complex64>> {
    let n = g.rows();
    let zero = Complex64::new(0.0, 0.0);
    let mut l = vec![vec![zero; n]; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let residual = |i: usize, l: &[Vec<Complex64>]| {
            g[(i, i)].re - l[i][..k].iter().map(|z| z.norm_sqr()).sum::<f64>()
        };
        let Some((pos, &p)) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| residual(*a.1, &l).total_cmp(&residual(*b.1, &l)))
        else {
            break;
        };
        let d = residual(p, &l);
        if d <= tol {
            break;
        }
        let pivot = d.sqrt();
        l[p][k] = Complex64::new(pivot, 0.0);
        remaining.swap_remove(pos);
        for &i in &remaining {
            let s: Complex64 = (0..k).map(|j| l[i][j] * l[p][j].conj()).sum();
            l[i][k] = (g[(i, p)] - s) / pivot;
        }
    }
    l
}

/// Builds machine states reproducing the Gram of `cfg` and the isometry
/// they define.
pub fn realize(cfg: &MachineConfig) -> Result<MachineRealization> {
    let gram = build_gram(cfg);
    let feas = gram_feasible(&gram, GRAM_TOL);
    if !feas.feasible {
        return Err(Error::InfeasibleMachine {
            min_eigenvalue: feas.min_eigenvalue,
        });
    }
    let rows = pivoted_cholesky(gram.matrix(), GRAM_TOL);
    // ⟨v_i|v_j⟩ = Σ_k L_ik conj(L_jk) when v_i = conj(L_i).
    let vectors: [Vec<Complex64>; 4] =
        std::array::from_fn(|i| rows[i].iter().map(|z| z.conj()).collect());
    MachineRealization::from_parts(*cfg, vectors)
}

/// Numerical residual of one machine constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintResidual {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub residuals: Vec<ConstraintResidual>,
}

impl ConstraintReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.residual)
    }
}

/// Evaluates every machine constraint on a realization.
pub fn verify_machine_constraints(r: &MachineRealization, cfg: &MachineConfig) -> ConstraintReport {
    use MachineState::*;
    let ov = |a: MachineState, b: MachineState| inner(r.vector(a), r.vector(b));
    let (m0, m1, m0t, m1t) = (cfg.m0(), cfg.m1(), cfg.m0_tilde(), cfg.m1_tilde());
    let eta = cfg.eta();

    let pair0 = ov(M0, M0Tilde) * (m0 * m0t);
    let pair1 = ov(M1, M1Tilde) * (m1 * m1t);
    let norms = [M0, M1, M0Tilde, M1Tilde]
        .iter()
        .map(|&s| (ov(s, s).re - 1.0).abs())
        .fold(0.0, f64::max);
    let magnitudes = [
        (m0, (1.0 + eta) / 2.0),
        (m1, (1.0 - eta) / 2.0),
        (m0t, (1.0 - eta) / 2.0),
        (m1t, (1.0 + eta) / 2.0),
    ]
    .iter()
    .map(|(m, want_sq)| (m - want_sq.sqrt()).abs())
    .fold(0.0, f64::max);
    let vdv = &r.isometry().adjoint() * r.isometry();

    let residuals = vec![
        ConstraintResidual {
            name: "unitarity",
            residual: (m0 * m0 + m1 * m1 - 1.0)
                .abs()
                .max((m0t * m0t + m1t * m1t - 1.0).abs()),
        },
        ConstraintResidual {
            name: "orthogonality",
            residual: (pair0 + pair1).norm(),
        },
        ConstraintResidual {
            name: "normalization",
            residual: norms,
        },
        ConstraintResidual {
            name: "overlap_m1_m0",
            residual: (ov(M1, M0) * (m0 * m1)).norm(),
        },
        ConstraintResidual {
            name: "overlap_m1t_m0t",
            residual: (ov(M1Tilde, M0Tilde) * (m0t * m1t)).norm(),
        },
        ConstraintResidual {
            name: "overlap_m1_m0t",
            residual: (ov(M1, M0Tilde) * (m1 * m0t)).norm(),
        },
        ConstraintResidual {
            name: "real_part_m0_m0t",
            residual: pair0.re.abs(),
        },
        ConstraintResidual {
            name: "real_part_m1_m1t",
            residual: pair1.re.abs(),
        },
        ConstraintResidual {
            name: "reduction_factor",
            residual: (Complex64::new(eta, 0.0) - ov(M1Tilde, M0) * (m0 * m1t)).norm(),
        },
        ConstraintResidual {
            name: "coefficient_magnitudes",
            residual: magnitudes,
        },
        ConstraintResidual {
            name: "scaled_lambda",
            residual: (pair0.im - cfg.scaled_lambda()).abs(),
        },
        ConstraintResidual {
            name: "isometry",
            residual: vdv.max_abs_diff(&ComplexMatrix::identity(2)),
        },
    ];
    ConstraintReport { residuals }
}
