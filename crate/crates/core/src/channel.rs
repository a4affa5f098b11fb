//! Two-qubit outputs of local machines, computed twice: by the closed-form
//! matrices for Schmidt-form inputs, and by brute-force simulation through
//! the machine isometries.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{MachineConfig, MachineRealization, MACHINE_DIM};
use crate::numerics::{partial_trace, reduce_two_qubit, ComplexMatrix, Subsystem};
use crate::states::{DensityMatrix, TwoQubitPureState};

/// Diagonal building blocks of the asymmetric output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetricEntries {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub c: f64,
}

impl AsymmetricEntries {
    pub fn new(st: &TwoQubitPureState, cfg_x: &MachineConfig, cfg_y: &MachineConfig) -> Self {
        let (a2, b2) = (st.alpha() * st.alpha(), st.beta() * st.beta());
        Self::from_weights(
            a2,
            b2,
            cfg_x.eta(),
            cfg_y.eta(),
            cfg_x.scaled_lambda(),
            cfg_y.scaled_lambda(),
        )
    }

    /// From Schmidt weights `(α², β²)`, reduction factors and scaled lambdas.
    pub fn from_weights(a2: f64, b2: f64, eta_x: f64, eta_y: f64, lam_x: f64, lam_y: f64) -> Self {
        let s = (a2 * b2).sqrt();
        let lo = (1.0 - eta_x) * (1.0 - eta_y) / 4.0;
        let mid = (1.0 - eta_x) * (1.0 + eta_y) / 4.0;
        Self {
            b1: lo + a2 * (eta_x + eta_y) / 2.0,
            b2: mid + a2 * (eta_x - eta_y) / 2.0,
            b3: mid + b2 * (eta_x - eta_y) / 2.0,
            b4: lo + b2 * (eta_x + eta_y) / 2.0,
            c: 2.0 * s * lam_x * lam_y,
        }
    }
}

/// Output density matrix in the basis |00⟩, |01⟩, |10⟩, |11⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    pub rho_out: DensityMatrix,
}

impl ChannelOutput {
    pub fn matrix(&self) -> &ComplexMatrix {
        self.rho_out.matrix()
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn output(m: ComplexMatrix) -> ChannelOutput {
    ChannelOutput {
        rho_out: DensityMatrix::new_unchecked(m),
    }
}

/// Machine on qubit `y` only.
pub fn closed_form_ta(st: &TwoQubitPureState, cfg_y: &MachineConfig) -> ChannelOutput {
    let (a, b) = (st.alpha(), st.beta());
    let s = a * b;
    let eta = cfg_y.eta();
    let l = cfg_y.scaled_lambda();
    let z = re(0.0);
    output(ComplexMatrix::from_rows(&[
        [re(a * a * (1.0 + eta) / 2.0), z, im(-s * l), re(s * eta)],
        [z, re(a * a * (1.0 - eta) / 2.0), z, im(s * l)],
        [im(s * l), z, re(b * b * (1.0 - eta) / 2.0), z],
        [re(s * eta), im(-s * l), z, re(b * b * (1.0 + eta) / 2.0)],
    ]))
}

/// The same machine on both qubits.
pub fn closed_form_sym(st: &TwoQubitPureState, cfg: &MachineConfig) -> ChannelOutput {
    let (a, b) = (st.alpha(), st.beta());
    let s = a * b;
    let eta = cfg.eta();
    let l = cfg.scaled_lambda();
    let edge = (1.0 - eta).powi(2) / 4.0 - 2.0 * s * l * l;
    let inner = (1.0 - eta * eta) / 4.0 + 2.0 * s * l * l;
    let off = s * l * eta;
    let z = re(0.0);
    output(ComplexMatrix::from_rows(&[
        [
            re(edge + a * a * eta),
            im(-off),
            im(-off),
            re(s * eta * eta),
        ],
        [im(off), re(inner), z, im(off)],
        [im(off), z, re(inner), im(off)],
        [
            re(s * eta * eta),
            im(-off),
            im(-off),
            re(edge + b * b * eta),
        ],
    ]))
}

/// Independent machines on both qubits.
pub fn closed_form_asym(
    st: &TwoQubitPureState,
    cfg_x: &MachineConfig,
    cfg_y: &MachineConfig,
) -> ChannelOutput {
    let s = st.schmidt_product();
    let AsymmetricEntries { b1, b2, b3, b4, c } = AsymmetricEntries::new(st, cfg_x, cfg_y);
    let (ex, ey) = (cfg_x.eta(), cfg_y.eta());
    let (lx, ly) = (cfg_x.scaled_lambda(), cfg_y.scaled_lambda());
    let (p, q) = (s * lx * ey, s * ly * ex);
    let z = re(0.0);
    output(ComplexMatrix::from_rows(&[
        [re(b1 - c), im(-p), im(-q), re(s * ex * ey)],
        [im(p), re(b2 + c), z, im(q)],
        [im(q), z, re(b3 + c), im(p)],
        [re(s * ex * ey), im(-q), im(-p), re(b4 - c)],
    ]))
}

/// Applies optional machines on `x` and `y` to an arbitrary two-qubit state
/// by embedding through `V_x ⊗ V_y` and tracing out both machine registers.
pub fn simulate_channel(
    rho_in: &DensityMatrix,
    machine_x: Option<&MachineRealization>,
    machine_y: Option<&MachineRealization>,
) -> Result<ChannelOutput> {
    if rho_in.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit channel needs a 4x4 state, got {}",
            rho_in.dim()
        )));
    }
    let embed = |m: Option<&MachineRealization>| match m {
        Some(r) => (r.isometry().clone(), MACHINE_DIM),
        None => (ComplexMatrix::identity(2), 1),
    };
    let (vx, dx) = embed(machine_x);
    let (vy, dy) = embed(machine_y);
    let w = vx.kron(&vy);
    let big = &(&w * rho_in.matrix()) * &w.adjoint();
    let reduced = partial_trace(&big, &[2, dx, 2, dy], &[0, 2])?;
    Ok(output(reduced.hermitian_part()))
}

/// Least-squares shrink factor of one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideFit {
    pub eta: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShrinkFactors {
    pub x: SideFit,
    pub y: SideFit,
}

/// Fits `Tr_other(ρ_out) − I/2 = η · (Tr_other(ρ_in) − I/2)` for one side.
/// The residual is the largest entry of the fit error.
pub fn side_shrink_factor(
    rho_in: &DensityMatrix,
    rho_out: &DensityMatrix,
    side: Subsystem,
) -> Result<SideFit> {
    let half = ComplexMatrix::identity(2).scale_re(0.5);
    let r_in = &reduce_two_qubit(rho_in.matrix(), side)? - &half;
    let r_out = &reduce_two_qubit(rho_out.matrix(), side)? - &half;
    if r_in.max_abs() <= 1e-12 {
        return Err(Error::DegenerateInput {
            side: match side {
                Subsystem::First => "x",
                Subsystem::Second => "y",
            },
        });
    }
    let eta = r_in.frobenius_dot(&r_out) / r_in.frobenius_dot(&r_in);
    let residual = r_out.max_abs_diff(&r_in.scale_re(eta));
    Ok(SideFit { eta, residual })
}

pub fn reduced_shrink_factors(
    rho_in: &DensityMatrix,
    rho_out: &DensityMatrix,
) -> Result<ShrinkFactors> {
    Ok(ShrinkFactors {
        x: side_shrink_factor(rho_in, rho_out, Subsystem::First)?,
        y: side_shrink_factor(rho_in, rho_out, Subsystem::Second)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{is_feasible, realize};
    use crate::states::{pure_state_density, sample_random_state, StateKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn feasible_cfg(rng: &mut ChaCha8Rng) -> MachineConfig {
        loop {
            let cfg =
                MachineConfig::new(rng.random_range(0.01..=1.0), rng.random_range(-1.0..=1.0))
                    .unwrap();
            if is_feasible(&cfg) {
                return cfg;
            }
        }
    }

    #[test]
    fn identity_machine_leaves_input() {
        let st = TwoQubitPureState::from_alpha(0.8).unwrap();
        let id = MachineConfig::identity();
        let rho = pure_state_density(&st);
        assert!(closed_form_ta(&st, &id).matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!(
            closed_form_sym(&st, &id)
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-15
        );
    }

    #[test]
    fn product_input_gives_product_output() {
        let st = TwoQubitPureState::new(1.0, 0.0).unwrap();
        let cfg = MachineConfig::new(0.4, 0.3).unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[0.7, 0.3, 0.0, 0.0]);
        assert!(closed_form_ta(&st, &cfg).matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn sym_diagonal_without_coherences() {
        let st = TwoQubitPureState::new(1.0, 0.0).unwrap();
        let eta = 0.45;
        let cfg = MachineConfig::new(eta, 0.0).unwrap();
        let out = closed_form_sym(&st, &cfg);
        let want = [
            (1.0 - eta) * (1.0 - eta) / 4.0 + eta,
            (1.0 - eta * eta) / 4.0,
            (1.0 - eta * eta) / 4.0,
            (1.0 - eta) * (1.0 - eta) / 4.0,
        ];
        assert!(
            out.matrix()
                .max_abs_diff(&ComplexMatrix::from_real_diagonal(&want))
                < 1e-15
        );
    }

    #[test]
    fn asym_reduces_to_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0)).unwrap();
            let cfg = feasible_cfg(&mut rng);
            let ta = closed_form_asym(&st, &MachineConfig::identity(), &cfg);
            assert!(ta.matrix().max_abs_diff(closed_form_ta(&st, &cfg).matrix()) < 1e-12);
            let sym = closed_form_asym(&st, &cfg, &cfg);
            assert!(
                sym.matrix()
                    .max_abs_diff(closed_form_sym(&st, &cfg).matrix())
                    < 1e-12
            );
        }
    }

    #[test]
    fn entries_sum_to_one() {
        let st = TwoQubitPureState::from_alpha(0.3).unwrap();
        let e = AsymmetricEntries::new(
            &st,
            &MachineConfig::new(0.7, 0.1).unwrap(),
            &MachineConfig::new(0.2, -0.4).unwrap(),
        );
        assert!((e.b1 + e.b2 + e.b3 + e.b4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0)).unwrap();
            let (cx, cy) = (feasible_cfg(&mut rng), feasible_cfg(&mut rng));
            let (rx, ry) = (realize(&cx).unwrap(), realize(&cy).unwrap());
            let rho = pure_state_density(&st);
            let ta = simulate_channel(&rho, None, Some(&ry)).unwrap();
            assert!(ta.matrix().max_abs_diff(closed_form_ta(&st, &cy).matrix()) < 1e-10);
            let sym = simulate_channel(&rho, Some(&rx), Some(&rx)).unwrap();
            assert!(
                sym.matrix()
                    .max_abs_diff(closed_form_sym(&st, &cx).matrix())
                    < 1e-10
            );
            let asym = simulate_channel(&rho, Some(&rx), Some(&ry)).unwrap();
            assert!(
                asym.matrix()
                    .max_abs_diff(closed_form_asym(&st, &cx, &cy).matrix())
                    < 1e-10
            );
        }
    }

    #[test]
    fn no_machines_is_identity() {
        let rho = sample_random_state(StateKind::Mixed, 4);
        let out = simulate_channel(&rho, None, None).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let rx = realize(&MachineConfig::new(0.6, 0.2).unwrap()).unwrap();
        let ry = realize(&MachineConfig::new(0.3, -0.5).unwrap()).unwrap();
        let mm = DensityMatrix::maximally_mixed(4);
        let out = simulate_channel(&mm, Some(&rx), Some(&ry)).unwrap();
        assert!(out.matrix().max_abs_diff(mm.matrix()) < 1e-12);
    }

    #[test]
    fn shrink_factors_of_identity_pair() {
        let rho = pure_state_density(&TwoQubitPureState::from_alpha(0.9).unwrap());
        let f = reduced_shrink_factors(&rho, &rho).unwrap();
        assert!((f.x.eta - 1.0).abs() < 1e-15 && (f.y.eta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shrink_factors_of_ta_output() {
        let st = TwoQubitPureState::from_alpha(0.7_f64.sqrt()).unwrap();
        let out = closed_form_ta(&st, &MachineConfig::new(1.0 / 3.0, 0.0).unwrap());
        let f = reduced_shrink_factors(&pure_state_density(&st), &out.rho_out).unwrap();
        assert!((f.x.eta - 1.0).abs() < 1e-12);
        assert!((f.y.eta - 1.0 / 3.0).abs() < 1e-12);
        assert!(f.x.residual < 1e-10 && f.y.residual < 1e-10);
    }

    #[test]
    fn maximally_entangled_is_degenerate() {
        let st = TwoQubitPureState::from_schmidt_product(0.5).unwrap();
        let rho = pure_state_density(&st);
        assert!(matches!(
            side_shrink_factor(&rho, &rho, Subsystem::First),
            Err(Error::DegenerateInput { side: "x" })
        ));
        assert!(matches!(
            side_shrink_factor(&rho, &rho, Subsystem::Second),
            Err(Error::DegenerateInput { side: "y" })
        ));
    }
}
