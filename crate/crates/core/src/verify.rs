//! Property suites run by the `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{closed_form_asym, closed_form_sym, closed_form_ta, simulate_channel};
use crate::error::Result;
use crate::frontier::{lambda_residual_probe, mixed_state_experiment};
use crate::machine::{is_feasible, realize, MachineConfig};
use crate::numerics::{reduce_two_qubit, ComplexMatrix, Subsystem};
use crate::separability::cross_validate_sweep;
use crate::states::{
    bloch_to_density, density_to_bloch, pure_state_density, random_unit_bloch, TwoQubitPureState,
};

pub const ORACLE_TOL: f64 = 1e-10;
pub const ISOTROPY_TOL: f64 = 1e-10;
pub const PPT_TOL: f64 = 1e-8;
pub const SHRINK_TOL: f64 = 1e-8;
pub const LINEARITY_TOL: f64 = 1e-10;
pub const REDUCED_TOL: f64 = 1e-12;

pub const ISOTROPY_ETAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const ISOTROPY_LAMBDAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteSizes {
    pub oracle_draws: usize,
    pub isotropy_draws: usize,
    pub cross_draws: usize,
    pub mixed_samples: usize,
    pub residual_samples: usize,
    pub reduced_draws: usize,
}

impl Suite {
    pub fn sizes(self) -> SuiteSizes {
        match self {
            Suite::Quick => SuiteSizes {
                oracle_draws: 200,
                isotropy_draws: 10,
                cross_draws: 5_000,
                mixed_samples: 50,
                residual_samples: 2_000,
                reduced_draws: 100,
            },
            Suite::Full => SuiteSizes {
                oracle_draws: 1_000,
                isotropy_draws: 50,
                cross_draws: 100_000,
                mixed_samples: 200,
                residual_samples: 10_000,
                reduced_draws: 100,
            },
        }
    }
}

/// One property check: `max_residual <= tolerance` unless noted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub count: usize,
    pub skipped: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn feasible_cfg(rng: &mut ChaCha8Rng) -> MachineConfig {
    loop {
        let cfg = MachineConfig::new(
            1.0 - rng.random_range(0.0..1.0),
            rng.random_range(-1.0..=1.0),
        )
        .expect("in domain");
        if is_feasible(&cfg) {
            return cfg;
        }
    }
}

/// Largest entrywise gap between each closed form and the isometry
/// simulation, over random feasible draws.
pub fn oracle_equivalence(draws: usize, seed: u64) -> Result<f64> {
    let gaps: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0))?;
            let (cx, cy) = (feasible_cfg(&mut rng), feasible_cfg(&mut rng));
            let (rx, ry) = (realize(&cx)?, realize(&cy)?);
            let rho = pure_state_density(&st);
            let ta = simulate_channel(&rho, None, Some(&ry))?;
            let sym = simulate_channel(&rho, Some(&rx), Some(&rx))?;
            let asym = simulate_channel(&rho, Some(&rx), Some(&ry))?;
            Ok(closed_form_ta(&st, &cy)
                .matrix()
                .max_abs_diff(ta.matrix())
                .max(
                    closed_form_sym(&st, &cx)
                        .matrix()
                        .max_abs_diff(sym.matrix()),
                )
                .max(
                    closed_form_asym(&st, &cx, &cy)
                        .matrix()
                        .max_abs_diff(asym.matrix()),
                ))
        })
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsotropyCell {
    pub eta: f64,
    pub lambda: f64,
    pub feasible: bool,
    /// `max |s_out − η s_in|` over the draws (0 when infeasible).
    pub max_deviation: f64,
}

/// Single-qubit Bloch shrink on the fixed `(η, λ)` grid.
pub fn isotropy_grid(draws: usize, seed: u64) -> Result<Vec<IsotropyCell>> {
    let cells: Vec<(f64, f64)> = ISOTROPY_ETAS
        .iter()
        .flat_map(|&e| ISOTROPY_LAMBDAS.iter().map(move |&l| (e, l)))
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(k, &(eta, lambda))| {
            let cfg = MachineConfig::new(eta, lambda)?;
            if !is_feasible(&cfg) {
                return Ok(IsotropyCell {
                    eta,
                    lambda,
                    feasible: false,
                    max_deviation: 0.0,
                });
            }
            let r = realize(&cfg)?;
            let mut rng = stream_rng(seed, k as u64);
            let mut max_deviation: f64 = 0.0;
            for _ in 0..draws {
                let s = random_unit_bloch(&mut rng);
                let out = density_to_bloch(&r.apply(bloch_to_density(&s).matrix())?)?;
                max_deviation = max_deviation.max(out.max_abs_diff(&s.scaled(eta)));
            }
            Ok(IsotropyCell {
                eta,
                lambda,
                feasible: true,
                max_deviation,
            })
        })
        .collect()
}

/// `Tr_y` of the one-sided output against `diag(α², β²)`.
pub fn ta_reduced_invariance(draws: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..draws as u64 {
        let mut rng = stream_rng(seed, i);
        let st = TwoQubitPureState::from_alpha(rng.random_range(0.0..=1.0))?;
        let cfg = feasible_cfg(&mut rng);
        let out = closed_form_ta(&st, &cfg);
        let red = reduce_two_qubit(out.matrix(), Subsystem::First)?;
        let want = ComplexMatrix::from_real_diagonal(&[st.alpha().powi(2), st.beta().powi(2)]);
        worst = worst.max(red.max_abs_diff(&want));
    }
    Ok(worst)
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifySummary> {
    let n = suite.sizes();
    let mut checks = Vec::new();

    let gap = oracle_equivalence(n.oracle_draws, seed)?;
    checks.push(CheckResult {
        name: "oracle_equivalence",
        passed: gap <= ORACLE_TOL,
        count: n.oracle_draws,
        skipped: 0,
        max_residual: gap,
        tolerance: ORACLE_TOL,
        note: None,
    });

    let cells = isotropy_grid(n.isotropy_draws, seed)?;
    let feasible: Vec<&IsotropyCell> = cells.iter().filter(|c| c.feasible).collect();
    let iso = feasible.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let failing: Vec<&&IsotropyCell> = feasible
        .iter()
        .filter(|c| c.max_deviation > ISOTROPY_TOL)
        .collect();
    let with_lambda = failing.iter().filter(|c| c.lambda != 0.0).count();
    checks.push(CheckResult {
        name: "isotropy",
        passed: iso <= ISOTROPY_TOL,
        count: feasible.len() * n.isotropy_draws,
        skipped: cells.len() - feasible.len(),
        max_residual: iso,
        tolerance: ISOTROPY_TOL,
        note: (!failing.is_empty()).then(|| {
            format!(
                "{} feasible cells deviate, {with_lambda} of them with lambda != 0",
                failing.len()
            )
        }),
    });

    let sweep = cross_validate_sweep(n.cross_draws, seed, PPT_TOL);
    checks.push(CheckResult {
        name: "cross_validation",
        passed: sweep.hard_failures == 0,
        count: sweep.evaluated(),
        skipped: sweep.skipped_infeasible,
        max_residual: -sweep.worst_hard_violation,
        tolerance: PPT_TOL,
        note: Some(format!(
            "hard failures {} (largest alpha*beta {:e}, {} with every condition >= 0), ppt-only {}",
            sweep.hard_failures,
            sweep.max_hard_alpha_beta,
            sweep.hard_failures_at_zero_tol,
            sweep.ppt_only
        )),
    });

    let (cx, cy) = (MachineConfig::new(0.8, 0.0)?, MachineConfig::new(0.4, 0.0)?);
    let mixed = mixed_state_experiment(n.mixed_samples, &cx, &cy, seed)?;
    checks.push(CheckResult {
        name: "mixed_state",
        passed: mixed.passes(SHRINK_TOL, LINEARITY_TOL),
        count: mixed.checked,
        skipped: mixed.degenerate,
        max_residual: mixed.max_shrink_error,
        tolerance: SHRINK_TOL,
        note: Some(format!(
            "max linearity residual {:e}",
            mixed.max_linearity_residual
        )),
    });

    let red = ta_reduced_invariance(n.reduced_draws, seed)?;
    checks.push(CheckResult {
        name: "ta_reduced_invariance",
        passed: red <= REDUCED_TOL,
        count: n.reduced_draws,
        skipped: 0,
        max_residual: red,
        tolerance: REDUCED_TOL,
        note: None,
    });

    let probe = lambda_residual_probe(n.residual_samples, seed);
    let missing: Vec<f64> = probe
        .buckets
        .iter()
        .filter(|b| b.positive == 0)
        .map(|b| b.alpha_beta)
        .collect();
    checks.push(CheckResult {
        name: "lambda_residual_sign",
        passed: probe.every_bucket_has_positive(),
        count: probe.samples,
        skipped: probe.rejected_infeasible,
        max_residual: probe
            .buckets
            .iter()
            .map(|b| b.max_residual)
            .fold(f64::NEG_INFINITY, f64::max),
        tolerance: 0.0,
        note: (!missing.is_empty()).then(|| {
            format!(
                "{} of {} alpha*beta buckets saw no positive residual, smallest {}",
                missing.len(),
                probe.buckets.len(),
                missing[0]
            )
        }),
    });

    Ok(VerifySummary {
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
