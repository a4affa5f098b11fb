//! PPT certification of channel outputs and the closed-form separability
//! conditions for each machine arrangement.
//!
//! For a 2⊗2 state the partial transpose has unit trace, and it is PSD iff
//! the elementary symmetric functions `e₂, e₃, e₄` of its spectrum are all
//! non-negative. Every condition set below is one of those coefficients up to
//! a positive constant, written as a polynomial in `αβ`, `η` and `Λ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    closed_form_asym, closed_form_sym, closed_form_ta, AsymmetricEntries, ChannelOutput,
};
use crate::error::{Error, Result};
use crate::machine::{is_feasible, MachineConfig};
use crate::numerics::{hermitian_eigenvalues, partial_transpose, Subsystem, HERMITIAN_TOL};
use crate::states::{schmidt_weights, DensityMatrix, TwoQubitPureState};

/// Absolute tolerance for calling a condition value satisfied.
pub const CONDITION_TOL: f64 = 1e-12;

/// Which machine arrangement a condition set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionCase {
    /// Machine on one qubit only.
    Ta,
    /// Identical machines on both qubits.
    Sym,
    /// `Sym` with `Λ = 0`.
    SymL0,
    /// `Sym` at `αβ = 1/2`.
    SymMaxent,
    /// Independent machines on both qubits.
    Asym,
    /// `Asym` with `Λx = Λy = 0`.
    AsymL0,
}

/// Signed condition values; the set is satisfied when all are `>= -tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionSet {
    pub case: ConditionCase,
    pub values: [f64; 3],
}

impl ConditionSet {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_schmidt_product(s: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::Domain(format!(
            "alpha*beta must lie in [0, 1/2], got {s}"
        )));
    }
    Ok(())
}

fn check_eta(eta: f64, name: &str) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!(
            "{name} must lie in (0, 1], got {eta}"
        )));
    }
    Ok(())
}

fn check_scaled_lambda(eta: f64, big_l: f64, name: &str) -> Result<()> {
    let bound = (1.0 - eta * eta) / 4.0;
    if !big_l.is_finite() || big_l * big_l > bound + 1e-12 {
        return Err(Error::Domain(format!(
            "{name}^2 = {} exceeds (1 - eta^2)/4 = {bound}",
            big_l * big_l
        )));
    }
    Ok(())
}

/// Machine on `y` only, `Λ_y` given directly.
pub fn conditions_ta(alpha_beta: f64, eta_y: f64, lambda_y: f64) -> Result<ConditionSet> {
    check_schmidt_product(alpha_beta)?;
    check_eta(eta_y, "eta_y")?;
    check_scaled_lambda(eta_y, lambda_y, "Lambda_y")?;
    Ok(ta_values(alpha_beta, eta_y, lambda_y))
}

pub(crate) fn ta_values(s: f64, eta: f64, l: f64) -> ConditionSet {
    let s2 = s * s;
    let l2 = l * l;
    ConditionSet {
        case: ConditionCase::Ta,
        values: [
            1.0 - eta * eta + 2.0 * s2 * (1.0 - eta * eta - 4.0 * l2),
            s2 * ((1.0 + eta).powi(2) * (1.0 - 2.0 * eta) - 4.0 * l2),
            s2 * s2
                * ((1.0 - 3.0 * eta) * (1.0 + eta).powi(3)
                    + 8.0 * l2 * (2.0 * l2 - 1.0 + eta * eta)),
        ],
    }
}

/// Identical machines on both sides.
pub fn conditions_sym(alpha_beta: f64, eta: f64, lambda: f64) -> Result<ConditionSet> {
    check_schmidt_product(alpha_beta)?;
    check_eta(eta, "eta")?;
    check_scaled_lambda(eta, lambda, "Lambda")?;
    Ok(sym_values(alpha_beta, eta, lambda))
}

pub(crate) fn sym_values(s: f64, eta: f64, l: f64) -> ConditionSet {
    let (a2, b2) = schmidt_weights(s);
    let l2 = l * l;
    let edge = (1.0 - eta).powi(2) / 4.0 - 2.0 * s * l2;
    let a1 = edge + a2 * eta;
    let a2c = (1.0 - eta * eta) / 4.0 + 2.0 * s * l2;
    let a3 = edge + b2 * eta;
    let se2 = (s * eta).powi(2);
    let sel2 = se2 * l2;
    let s3e4 = s.powi(3) * eta.powi(4);
    ConditionSet {
        case: ConditionCase::Sym,
        values: [
            a1 * (2.0 * a2c + a3) + a2c * (a2c + 2.0 * a3) - se2 * (4.0 * l2 + eta * eta),
            a1 * a2c * (a2c + 2.0 * a3) + a2c * a2c * a3
                - (a1 + a3) * se2 * (2.0 * l2 + eta * eta)
                - 4.0 * a2c * sel2
                - 4.0 * s3e4 * l2,
            a1 * a2c * a2c * a3
                - 2.0 * a2c * (a1 + a3) * sel2
                - a1 * a3 * s * s * eta.powi(4)
                - 2.0 * (a1 + a3) * s3e4 * l2,
        ],
    }
}

/// `Sym` at `Λ = 0`. The second value is normalized to coincide with the
/// general evaluator (the bare polynomial is sixteen times larger).
pub fn conditions_sym_l0(alpha_beta: f64, eta: f64) -> Result<ConditionSet> {
    check_schmidt_product(alpha_beta)?;
    check_eta(eta, "eta")?;
    let s = alpha_beta;
    let e2 = eta * eta;
    let se2 = (s * eta).powi(2);
    let q = (1.0 - e2).powi(2) / 16.0;
    Ok(ConditionSet {
        case: ConditionCase::SymL0,
        values: [
            (1.0 - e2) / 8.0 * (3.0 + e2 + 8.0 * se2),
            ((1.0 - e2).powi(2) + 8.0 * se2 * (1.0 - 2.0 * e2 - e2 * e2)) / 16.0,
            (q + se2) * (q - (s * e2).powi(2)),
        ],
    })
}

/// `Sym` for the maximally entangled input, as `bound - Λ⁴` style values.
pub fn conditions_maxent(eta: f64, lambda: f64) -> Result<ConditionSet> {
    check_eta(eta, "eta")?;
    check_scaled_lambda(eta, lambda, "Lambda")?;
    let e2 = eta * eta;
    let e4 = e2 * e2;
    let l2 = lambda * lambda;
    let l4 = l2 * l2;
    Ok(ConditionSet {
        case: ConditionCase::SymMaxent,
        values: [
            3.0 / 16.0 * (1.0 - e4) - l4,
            (1.0 - 3.0 * e4 - 2.0 * e4 * e2) / 16.0 - l4,
            (1.0 + e2 + 4.0 * l2) * (1.0 + e2 - 4.0 * l2) * (1.0 - 2.0 * e2 - 3.0 * e4 - 16.0 * l4),
        ],
    })
}

/// `(F₁, F₂, F₃)`: the PT coefficients of the asymmetric output at `Λ = 0`.
fn f_values(e: &AsymmetricEntries, s: f64, eta_x: f64, eta_y: f64) -> [f64; 3] {
    let AsymmetricEntries { b1, b2, b3, b4, .. } = *e;
    let k = (s * eta_x * eta_y).powi(2);
    [
        b1 * b2 + b1 * b3 + b1 * b4 + b2 * b3 + b2 * b4 + b3 * b4 - k,
        b1 * b2 * b3 + b1 * b2 * b4 + b1 * b3 * b4 + b2 * b3 * b4 - k * (b1 + b4),
        b1 * b2 * b3 * b4 - b1 * b4 * k,
    ]
}

fn entries_for(s: f64, eta_x: f64, eta_y: f64, lx: f64, ly: f64) -> AsymmetricEntries {
    let (a2, b2) = schmidt_weights(s);
    AsymmetricEntries::from_weights(a2, b2, eta_x, eta_y, lx, ly)
}

/// Value of the third asymmetric condition minus `F₃`: every term that
/// carries a `Λ` factor.
pub fn asym_third_residual(s: f64, eta_x: f64, eta_y: f64, lx: f64, ly: f64) -> f64 {
    let (ex2, ey2) = (eta_x * eta_x, eta_y * eta_y);
    let (lx2, ly2) = (lx * lx, ly * ly);
    let p = lx2 * ly2;
    let sum = lx2 * ey2 + ly2 * ex2;
    let diff = lx2 * ey2 - ly2 * ex2;
    let cross = lx * ly * eta_x * eta_y;
    let s2 = s * s;
    let s4 = s2 * s2;
    s4 / 2.0 * (4.0 * p * (ex2 + ey2 + 8.0 * p + 2.0 * ex2 * ey2) + 16.0 * p * sum)
        + s4 / 2.0 * diff * (2.0 * diff + ex2 - ey2)
        + s2 * s * cross / 2.0 * ((2.0 - ex2 - ey2 - 16.0 * p) - 4.0 * sum)
        - s2 / 8.0
            * (4.0 * p * (1.0 + ex2 + ey2 - 3.0 * ex2 * ey2)
                + sum * (1.0 - ex2 * ey2)
                + diff * (ex2 - ey2))
        - s * cross * (1.0 - ex2) * (1.0 - ey2) / 8.0
}

pub(crate) fn asym_values(s: f64, eta_x: f64, eta_y: f64, lx: f64, ly: f64) -> ConditionSet {
    let e = entries_for(s, eta_x, eta_y, lx, ly);
    let [f1, f2, f3] = f_values(&e, s, eta_x, eta_y);
    let (lx2, ly2) = (lx * lx, ly * ly);
    let sum = lx2 * eta_y * eta_y + ly2 * eta_x * eta_x;
    let cross = eta_x * eta_y * lx * ly;
    let s2 = s * s;
    ConditionSet {
        case: ConditionCase::Asym,
        values: [
            f1 + 2.0 * s * (cross - s * (4.0 * lx2 * ly2 + sum)),
            f2 + s2 * (4.0 * s * cross - sum) - 4.0 * s2 * lx2 * ly2,
            f3 + asym_third_residual(s, eta_x, eta_y, lx, ly),
        ],
    }
}

/// Independent machines on both sides.
pub fn conditions_asym(
    alpha_beta: f64,
    cfg_x: &MachineConfig,
    cfg_y: &MachineConfig,
) -> Result<ConditionSet> {
    check_schmidt_product(alpha_beta)?;
    Ok(asym_values(
        alpha_beta,
        cfg_x.eta(),
        cfg_y.eta(),
        cfg_x.scaled_lambda(),
        cfg_y.scaled_lambda(),
    ))
}

/// `(F₁, F₂, F₃)`.
pub fn conditions_asym_l0(alpha_beta: f64, eta_x: f64, eta_y: f64) -> Result<ConditionSet> {
    check_schmidt_product(alpha_beta)?;
    check_eta(eta_x, "eta_x")?;
    check_eta(eta_y, "eta_y")?;
    let e = entries_for(alpha_beta, eta_x, eta_y, 0.0, 0.0);
    Ok(ConditionSet {
        case: ConditionCase::AsymL0,
        values: f_values(&e, alpha_beta, eta_x, eta_y),
    })
}

/// PPT test result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparabilityVerdict {
    pub ppt: bool,
    pub min_pt_eigenvalue: f64,
    pub conditions: Option<ConditionSet>,
}

/// Separable iff the partial transpose has no eigenvalue below `-tol`.
pub fn ppt_verdict(rho: &DensityMatrix, tol: f64) -> Result<SeparabilityVerdict> {
    let m = rho.matrix();
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::NotDensityMatrix(format!(
            "expected 4x4, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::NotDensityMatrix("not Hermitian".into()));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let pt = partial_transpose(m, Subsystem::Second)?;
    let min_pt_eigenvalue = hermitian_eigenvalues(&pt)?.min();
    Ok(SeparabilityVerdict {
        ppt: min_pt_eigenvalue >= -tol,
        min_pt_eigenvalue,
        conditions: None,
    })
}

/// How the closed-form conditions and the PPT oracle relate at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    BothSeparable,
    BothEntangled,
    /// Conditions fail but the state is PPT. Allowed: the conditions are
    /// only claimed to be sufficient.
    PptOnly,
    /// Conditions hold but the PPT oracle finds entanglement.
    HardFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub case: ConditionCase,
    pub machines_feasible: bool,
    pub output: Vec<Vec<[f64; 2]>>,
    pub conditions: ConditionSet,
    pub verdict: SeparabilityVerdict,
    pub agreement: Agreement,
}

fn matrix_rows(out: &ChannelOutput) -> Vec<Vec<[f64; 2]>> {
    let m = out.matrix();
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Closed-form output for whichever machines are present. A lone `x`
/// machine is the one-sided case mirrored.
pub fn closed_form_output(
    st: &TwoQubitPureState,
    cfg_x: Option<&MachineConfig>,
    cfg_y: Option<&MachineConfig>,
) -> Result<(ConditionCase, ChannelOutput)> {
    Ok(match (cfg_x, cfg_y) {
        (None, None) => return Err(Error::Domain("at least one machine is required".into())),
        (None, Some(y)) => (ConditionCase::Ta, closed_form_ta(st, y)),
        (Some(x), None) => (
            ConditionCase::Ta,
            closed_form_asym(st, x, &MachineConfig::identity()),
        ),
        (Some(x), Some(y)) if x == y => (ConditionCase::Sym, closed_form_sym(st, x)),
        (Some(x), Some(y)) => (ConditionCase::Asym, closed_form_asym(st, x, y)),
    })
}

/// Builds the closed-form output for the given machines, evaluates the
/// matching condition set and the PPT oracle, and classifies agreement.
pub fn cross_validate(
    st: &TwoQubitPureState,
    cfg_x: Option<&MachineConfig>,
    cfg_y: Option<&MachineConfig>,
    tol: f64,
) -> Result<CrossValidation> {
    let s = st.schmidt_product();
    let (case, out) = closed_form_output(st, cfg_x, cfg_y)?;
    let conditions = match (case, cfg_x, cfg_y) {
        (ConditionCase::Ta, None, Some(c)) | (ConditionCase::Ta, Some(c), None) => {
            conditions_ta(s, c.eta(), c.scaled_lambda())?
        }
        (ConditionCase::Sym, Some(c), _) => conditions_sym(s, c.eta(), c.scaled_lambda())?,
        (_, Some(x), Some(y)) => conditions_asym(s, x, y)?,
        _ => unreachable!("closed_form_output rejects the empty arrangement"),
    };
    let machines_feasible = cfg_x.is_none_or(is_feasible) && cfg_y.is_none_or(is_feasible);
    let mut verdict = ppt_verdict(&out.rho_out, tol)?;
    verdict.conditions = Some(conditions);
    let agreement = match (conditions.satisfied(CONDITION_TOL), verdict.ppt) {
        (true, true) => Agreement::BothSeparable,
        (false, false) => Agreement::BothEntangled,
        (false, true) => Agreement::PptOnly,
        (true, false) => Agreement::HardFailure,
    };
    Ok(CrossValidation {
        case,
        machines_feasible,
        output: matrix_rows(&out),
        conditions,
        verdict,
        agreement,
    })
}

/// Aggregate of a randomized cross-validation sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub draws: usize,
    pub skipped_infeasible: usize,
    pub both_separable: usize,
    pub both_entangled: usize,
    pub ppt_only: usize,
    pub hard_failures: usize,
    /// Most negative PT eigenvalue among hard failures (0 when none).
    pub worst_hard_violation: f64,
    /// Largest `αβ` among hard failures (0 when none).
    pub max_hard_alpha_beta: f64,
    /// Hard failures whose condition values are all non-negative, i.e.
    /// not explained by the absolute condition tolerance.
    pub hard_failures_at_zero_tol: usize,
}

impl SweepReport {
    pub fn evaluated(&self) -> usize {
        self.both_separable + self.both_entangled + self.ppt_only + self.hard_failures
    }
}

struct SweepOutcome {
    agreement: Agreement,
    min_pt: f64,
    alpha_beta: f64,
    min_condition: f64,
}

fn draw_cross_case(
    seed: u64,
    index: u64,
) -> (
    TwoQubitPureState,
    Option<MachineConfig>,
    Option<MachineConfig>,
) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0)).expect("alpha in range");
    let cfg = |rng: &mut rand_chacha::ChaCha8Rng| {
        let eta = 1.0 - rng.random_range(0.0..1.0);
        MachineConfig::new(eta, rng.random_range(-1.0..=1.0)).expect("in domain")
    };
    match rng.random_range(0..4u8) {
        0 => (st, None, Some(cfg(&mut rng))),
        1 => (st, Some(cfg(&mut rng)), None),
        2 => {
            let c = cfg(&mut rng);
            (st, Some(c), Some(c))
        }
        _ => (st, Some(cfg(&mut rng)), Some(cfg(&mut rng))),
    }
}

/// Random draws over every machine arrangement; infeasible machines are
/// skipped and counted. Deterministic in `seed` regardless of thread count.
pub fn cross_validate_sweep(draws: usize, seed: u64, tol: f64) -> SweepReport {
    let outcomes: Vec<Option<SweepOutcome>> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let (st, x, y) = draw_cross_case(seed, i);
            let cv = cross_validate(&st, x.as_ref(), y.as_ref(), tol)
                .expect("sampled parameters are in domain");
            cv.machines_feasible.then(|| SweepOutcome {
                agreement: cv.agreement,
                min_pt: cv.verdict.min_pt_eigenvalue,
                alpha_beta: st.schmidt_product(),
                min_condition: cv.conditions.min_value(),
            })
        })
        .collect();
    let mut report = SweepReport {
        draws,
        ..Default::default()
    };
    for outcome in outcomes {
        let Some(o) = outcome else {
            report.skipped_infeasible += 1;
            continue;
        };
        match o.agreement {
            Agreement::BothSeparable => report.both_separable += 1,
            Agreement::BothEntangled => report.both_entangled += 1,
            Agreement::PptOnly => report.ppt_only += 1,
            Agreement::HardFailure => {
                report.hard_failures += 1;
                report.worst_hard_violation = report.worst_hard_violation.min(o.min_pt);
                report.max_hard_alpha_beta = report.max_hard_alpha_beta.max(o.alpha_beta);
                if o.min_condition >= 0.0 {
                    report.hard_failures_at_zero_tol += 1;
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexMatrix;
    use crate::states::pure_state_density;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: elementary symmetric functions of the PT spectrum.
    fn pt_coefficients(rho: &ComplexMatrix) -> [f64; 3] {
        let pt = partial_transpose(rho, Subsystem::Second).unwrap();
        let e = hermitian_eigenvalues(&pt).unwrap();
        let v = e.eigenvalues();
        let mut e2 = 0.0;
        let mut e3 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                e2 += v[i] * v[j];
                for k in j + 1..4 {
                    e3 += v[i] * v[j] * v[k];
                }
            }
        }
        [e2, e3, v.iter().product()]
    }

    fn random_cfg(rng: &mut ChaCha8Rng) -> MachineConfig {
        MachineConfig::new(
            1.0 - rng.random_range(0.0..1.0),
            rng.random_range(-1.0..=1.0),
        )
        .unwrap()
    }

    #[test]
    fn ta_third_value_vanishes_at_one_third() {
        let c = conditions_ta(0.5, 1.0 / 3.0, 0.0).unwrap();
        assert!(c.values[2].abs() < 1e-15);
        assert!(c.satisfied(CONDITION_TOL));
    }

    #[test]
    fn ta_third_value_negative_above_one_third() {
        let c = conditions_ta(0.5, 0.4, 0.0).unwrap();
        let want = (1.0 / 16.0) * (-0.2) * 1.4_f64.powi(3);
        assert!((c.values[2] - want).abs() < 1e-15);
        assert!(!c.satisfied(CONDITION_TOL));
    }

    #[test]
    fn ta_product_input_always_satisfied() {
        for eta in [0.1, 0.5, 0.9, 1.0] {
            let c = conditions_ta(0.0, eta, 0.0).unwrap();
            assert_eq!(c.values[1], 0.0);
            assert_eq!(c.values[2], 0.0);
            assert!((c.values[0] - (1.0 - eta * eta)).abs() < 1e-15);
            assert!(c.satisfied(CONDITION_TOL));
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            conditions_ta(0.6, 0.3, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            conditions_ta(0.3, 0.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            conditions_ta(0.3, 0.5, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            conditions_sym(-0.1, 0.5, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(conditions_maxent(1.2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            conditions_asym_l0(0.2, 0.5, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sym_general_reduces_to_l0() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let s = rng.random_range(0.0..=0.5);
            let eta = 1.0 - rng.random_range(0.0..1.0);
            let g = conditions_sym(s, eta, 0.0).unwrap();
            let l0 = conditions_sym_l0(s, eta).unwrap();
            for (a, b) in g.values.iter().zip(l0.values) {
                assert!((a - b).abs() < 1e-12, "{g:?} vs {l0:?}");
            }
        }
    }

    #[test]
    fn sym_boundary_at_inverse_root_three() {
        let eta = 1.0 / 3.0_f64.sqrt();
        let c = conditions_sym(0.5, eta, 0.0).unwrap();
        assert!(c.values.iter().all(|&v| v >= -1e-12), "{c:?}");
        let l0 = conditions_sym_l0(0.5, eta).unwrap();
        assert!(l0.values[2].abs() < 1e-15);
    }

    #[test]
    fn sym_l0_grid_below_threshold() {
        for i in 0..=100 {
            let s = 0.5 * i as f64 / 100.0;
            assert!(conditions_sym_l0(s, 0.57).unwrap().satisfied(CONDITION_TOL));
        }
        assert!(conditions_sym_l0(0.5, 0.99).unwrap().values[2] < 0.0);
    }

    #[test]
    fn maxent_specializations() {
        let eta = 1.0 / 3.0_f64.sqrt();
        let c = conditions_maxent(eta, 0.0).unwrap();
        let want = (1.0 - 3.0 * eta.powi(4) - 2.0 * eta.powi(6)) / 16.0;
        assert!((c.values[1] - want).abs() < 1e-15 && want > 0.0);
        let one = conditions_maxent(1.0, 0.0).unwrap();
        assert!((one.values[1] - (1.0 - 3.0 - 2.0) / 16.0).abs() < 1e-15);
        // η → 0: Λ⁴ ≤ 3/16, Λ⁴ ≤ 1/16 and the third factor (1-16Λ⁴)(1-16Λ⁴)
        let l = 0.45;
        let z = conditions_maxent(1e-9, l).unwrap();
        assert!((z.values[0] - (3.0 / 16.0 - l.powi(4))).abs() < 1e-12);
        assert!((z.values[1] - (1.0 / 16.0 - l.powi(4))).abs() < 1e-12);
        let f = 1.0 - 16.0 * l.powi(4);
        assert!((z.values[2] - (1.0 + 4.0 * l * l) * (1.0 - 4.0 * l * l) * f).abs() < 1e-9);
    }

    #[test]
    fn maxent_agrees_with_sym_at_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let eta = 1.0 - rng.random_range(0.0..1.0);
            let lambda = rng.random_range(-1.0..=1.0) * ((1.0 - eta * eta) / 4.0_f64).sqrt();
            let me = conditions_maxent(eta, lambda).unwrap();
            let sym = conditions_sym(0.5, eta, lambda).unwrap();
            // e₂/2 and e₃ exactly; e₄ times 256
            assert!((me.values[0] - sym.values[0] / 2.0).abs() < 1e-12);
            assert!((me.values[1] - sym.values[1]).abs() < 1e-12);
            assert!((me.values[2] - 256.0 * sym.values[2]).abs() < 1e-10);
        }
    }

    #[test]
    fn asym_zero_lambda_is_f_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = rng.random_range(0.0..=0.5);
            let (ex, ey) = (
                1.0 - rng.random_range(0.0..1.0),
                1.0 - rng.random_range(0.0..1.0),
            );
            let g = conditions_asym(
                s,
                &MachineConfig::new(ex, 0.0).unwrap(),
                &MachineConfig::new(ey, 0.0).unwrap(),
            )
            .unwrap();
            let l0 = conditions_asym_l0(s, ex, ey).unwrap();
            for (a, b) in g.values.iter().zip(l0.values) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn asym_l0_hyperbola_boundary() {
        for i in 1..=9 {
            let ex = 0.35 + 0.065 * i as f64;
            let ey = 1.0 / (3.0 * ex);
            if ey > 1.0 {
                continue;
            }
            let c = conditions_asym_l0(0.5, ex, ey).unwrap();
            assert!(c.min_value() >= -1e-12, "{ex}: {c:?}");
        }
        let beyond = conditions_asym_l0(0.5, 0.7, 0.7).unwrap();
        assert!(beyond.min_value() < 0.0);
        for ex in [0.1, 0.5, 1.0] {
            for ey in [0.2, 0.9, 1.0] {
                assert!(conditions_asym_l0(0.0, ex, ey)
                    .unwrap()
                    .satisfied(CONDITION_TOL));
            }
        }
    }

    #[test]
    fn every_condition_set_is_a_pt_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0)).unwrap();
            let s = st.schmidt_product();
            let (cx, cy) = (random_cfg(&mut rng), random_cfg(&mut rng));

            let ta = pt_coefficients(closed_form_ta(&st, &cy).matrix());
            let c = conditions_ta(s, cy.eta(), cy.scaled_lambda()).unwrap();
            for (k, scale) in [4.0, 4.0, 16.0].iter().enumerate() {
                assert!((c.values[k] - scale * ta[k]).abs() < 1e-11, "ta {k}");
            }

            let sym = pt_coefficients(closed_form_sym(&st, &cx).matrix());
            let c = conditions_sym(s, cx.eta(), cx.scaled_lambda()).unwrap();
            for (k, (v, want)) in c.values.iter().zip(sym).enumerate() {
                assert!((v - want).abs() < 1e-12, "sym {k}");
            }

            let asym = pt_coefficients(closed_form_asym(&st, &cx, &cy).matrix());
            let c = conditions_asym(s, &cx, &cy).unwrap();
            for (k, (v, want)) in c.values.iter().zip(asym).enumerate() {
                assert!((v - want).abs() < 1e-12, "asym {k}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn values_depend_on_schmidt_product_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0)).unwrap();
            let sw = st.swapped();
            let (cx, cy) = (random_cfg(&mut rng), random_cfg(&mut rng));
            let a = pt_coefficients(closed_form_asym(&st, &cx, &cy).matrix());
            let b = pt_coefficients(closed_form_asym(&sw, &cx, &cy).matrix());
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn near_product_inputs_hide_below_absolute_tolerance() {
        // η just above 1/3 on one side with a barely entangled input: the PT
        // eigenvalue scales like αβ while the last condition scales like (αβ)⁴
        let st = TwoQubitPureState::from_schmidt_product(3e-4).unwrap();
        let cfg = MachineConfig::new(0.38, 0.0).unwrap();
        let cv = cross_validate(&st, None, Some(&cfg), 1e-8).unwrap();
        assert!(cv.verdict.min_pt_eigenvalue < -1e-8);
        assert!(cv.conditions.values[2] < 0.0 && cv.conditions.values[2] > -1e-12);
        assert_eq!(cv.agreement, Agreement::HardFailure);
    }

    #[test]
    fn ppt_examples() {
        let product = pure_state_density(&TwoQubitPureState::new(1.0, 0.0).unwrap());
        assert!(ppt_verdict(&product, 1e-10).unwrap().ppt);

        let bell = pure_state_density(&TwoQubitPureState::from_schmidt_product(0.5).unwrap());
        let v = ppt_verdict(&bell, 1e-10).unwrap();
        assert!(!v.ppt);
        assert!((v.min_pt_eigenvalue + 0.5).abs() < 1e-12);

        let st = TwoQubitPureState::from_schmidt_product(0.5).unwrap();
        let out = closed_form_ta(&st, &MachineConfig::new(1.0 / 3.0, 0.0).unwrap());
        let v = ppt_verdict(&out.rho_out, 1e-10).unwrap();
        assert!(v.min_pt_eigenvalue.abs() < 1e-10);
        assert!(v.ppt);
    }

    #[test]
    fn ppt_rejects_bad_input() {
        let bad =
            DensityMatrix::new_unchecked(ComplexMatrix::from_real_diagonal(&[0.5, 0.5, 0.5, 0.5]));
        assert!(matches!(
            ppt_verdict(&bad, 1e-10),
            Err(Error::NotDensityMatrix(_))
        ));
    }

    #[test]
    fn mixtures_of_products_are_ppt() {
        use crate::states::{sample_random_state, StateKind};
        for seed in 0..50 {
            // Tr_y / Tr_x of random pure states give valid qubit states.
            let a = sample_random_state(StateKind::Mixed, seed);
            let b = sample_random_state(StateKind::Mixed, seed + 1000);
            let rx = crate::numerics::reduce_two_qubit(a.matrix(), Subsystem::First).unwrap();
            let ry = crate::numerics::reduce_two_qubit(b.matrix(), Subsystem::Second).unwrap();
            let rx2 = crate::numerics::reduce_two_qubit(b.matrix(), Subsystem::First).unwrap();
            let ry2 = crate::numerics::reduce_two_qubit(a.matrix(), Subsystem::Second).unwrap();
            let mix = &rx.kron(&ry).scale_re(0.3) + &rx2.kron(&ry2).scale_re(0.7);
            assert!(
                ppt_verdict(&DensityMatrix::new(mix).unwrap(), 1e-10)
                    .unwrap()
                    .ppt
            );
        }
    }

    #[test]
    fn cross_validate_classifies() {
        let st = TwoQubitPureState::from_schmidt_product(0.5).unwrap();
        let below = MachineConfig::new(0.3, 0.0).unwrap();
        let above = MachineConfig::new(0.5, 0.0).unwrap();
        let cv = cross_validate(&st, None, Some(&below), 1e-8).unwrap();
        assert_eq!(
            (cv.case, cv.agreement),
            (ConditionCase::Ta, Agreement::BothSeparable)
        );
        let cv = cross_validate(&st, Some(&above), None, 1e-8).unwrap();
        assert_eq!(
            (cv.case, cv.agreement),
            (ConditionCase::Ta, Agreement::BothEntangled)
        );
        let cv = cross_validate(&st, Some(&above), Some(&above), 1e-8).unwrap();
        assert_eq!(
            (cv.case, cv.agreement),
            (ConditionCase::Sym, Agreement::BothSeparable)
        );
        let cv = cross_validate(&st, Some(&above), Some(&below), 1e-8).unwrap();
        assert_eq!(cv.case, ConditionCase::Asym);
        assert!(cross_validate(&st, None, None, 1e-8).is_err());
    }

    #[test]
    fn cross_validate_boundaries() {
        let st = TwoQubitPureState::from_schmidt_product(0.5).unwrap();
        let ta = cross_validate(
            &st,
            None,
            Some(&MachineConfig::new(1.0 / 3.0, 0.0).unwrap()),
            1e-8,
        )
        .unwrap();
        assert!(ta.conditions.min_value().abs() < 1e-8);
        assert!(ta.verdict.min_pt_eigenvalue.abs() < 1e-8);
        let c = MachineConfig::new(1.0 / 3.0_f64.sqrt(), 0.0).unwrap();
        let sym = cross_validate(&st, Some(&c), Some(&c), 1e-8).unwrap();
        assert!(sym.conditions.min_value().abs() < 1e-8);
        assert!(sym.verdict.min_pt_eigenvalue.abs() < 1e-8);
    }

    #[test]
    fn small_sweep_is_clean_and_deterministic() {
        let a = cross_validate_sweep(2000, 99, 1e-8);
        assert_eq!(a.hard_failures_at_zero_tol, 0);
        assert!(a.skipped_infeasible > 0);
        assert_eq!(a.evaluated() + a.skipped_infeasible, a.draws);
        assert_eq!(a, cross_validate_sweep(2000, 99, 1e-8));
    }
}
