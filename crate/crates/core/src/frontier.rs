//! Worst-case-over-states searches: for which reduction factors does a
//! machine disentangle every Schmidt input at once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{reduced_shrink_factors, simulate_channel, ShrinkFactors};
use crate::error::{Error, Result};
use crate::machine::{is_feasible, realize, MachineConfig, MachineRealization};
use crate::separability::{
    asym_third_residual, asym_values, conditions_sym_l0, sym_values, ta_values, ConditionSet,
};
use crate::states::{sample_state_with, spectral_decompose, DensityMatrix, StateKind};

/// Default number of uniform `αβ` points.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default golden-section iterations around the worst grid point.
pub const DEFAULT_REFINEMENT_DEPTH: usize = 40;
pub const DEFAULT_BISECTION_TOL: f64 = 1e-6;
pub const DEFAULT_CONDITION_TOL: f64 = 1e-12;

/// `(λx, λy)` pairs plotted against the optimal hyperbola.
pub const DEFAULT_FIGURE2_PAIRS: [(f64, f64); 4] =
    [(0.0, 0.0), (0.2, -0.2), (0.5, -0.5), (0.9, 0.1)];

/// Sample points for `αβ ∈ [0, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityGrid {
    points: Vec<f64>,
    refinement_depth: usize,
}

impl UniversalityGrid {
    /// `n` evenly spaced points including both endpoints.
    pub fn uniform(n: usize, refinement_depth: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        let points = (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect();
        Self::new(points, refinement_depth)
    }

    pub fn new(points: Vec<f64>, refinement_depth: usize) -> Result<Self> {
        let ok_ends = points.first() == Some(&0.0) && points.last() == Some(&0.5);
        let ascending = points.windows(2).all(|w| w[0] < w[1]);
        if !ok_ends || !ascending {
            return Err(Error::Domain(
                "grid must ascend strictly from 0 to 1/2 inclusive".into(),
            ));
        }
        Ok(Self {
            points,
            refinement_depth,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn refinement_depth(&self) -> usize {
        self.refinement_depth
    }
}

impl Default for UniversalityGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_GRID_POINTS, DEFAULT_REFINEMENT_DEPTH).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSettings {
    pub grid: UniversalityGrid,
    pub bisection_tol: f64,
    pub condition_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            grid: UniversalityGrid::default(),
            bisection_tol: DEFAULT_BISECTION_TOL,
            condition_tol: DEFAULT_CONDITION_TOL,
        }
    }
}

type Evaluator = Box<dyn Fn(f64) -> ConditionSet + Sync>;

/// Machine arrangement with every parameter fixed except the searched `η`.
/// Lambdas are the raw overlap parameters in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Family {
    /// Machine on `y` only; `η` is `η_y`.
    Ta { lambda_y: f64 },
    /// Identical machines; `η` is the common factor.
    Sym { lambda: f64 },
    /// `Sym` with `λ = 0`, using the specialized conditions.
    SymL0,
    /// Independent machines; `η` is `η_y`.
    Asym {
        eta_x: f64,
        lambda_x: f64,
        lambda_y: f64,
    },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let lambda_ok = |l: f64| (-1.0..=1.0).contains(&l);
        let ok = match *self {
            Family::Ta { lambda_y } => lambda_ok(lambda_y),
            Family::Sym { lambda } => lambda_ok(lambda),
            Family::SymL0 => true,
            Family::Asym {
                eta_x,
                lambda_x,
                lambda_y,
            } => eta_x > 0.0 && eta_x <= 1.0 && lambda_ok(lambda_x) && lambda_ok(lambda_y),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("parameters out of range: {self:?}")))
        }
    }

    /// Condition evaluator at this `η`, or `None` if a machine is infeasible.
    fn evaluator(&self, eta: f64) -> Result<Option<Evaluator>> {
        let cfg = |e: f64, l: f64| MachineConfig::new(e, l);
        Ok(match *self {
            Family::Ta { lambda_y } => {
                let c = cfg(eta, lambda_y)?;
                let l = c.scaled_lambda();
                is_feasible(&c).then(|| Box::new(move |s| ta_values(s, eta, l)) as Box<_>)
            }
            Family::Sym { lambda } => {
                let c = cfg(eta, lambda)?;
                let l = c.scaled_lambda();
                is_feasible(&c).then(|| Box::new(move |s| sym_values(s, eta, l)) as Box<_>)
            }
            Family::SymL0 => {
                cfg(eta, 0.0)?;
                Some(Box::new(move |s| conditions_sym_l0(s, eta).expect("s on grid")) as Box<_>)
            }
            Family::Asym {
                eta_x,
                lambda_x,
                lambda_y,
            } => {
                let (cx, cy) = (cfg(eta_x, lambda_x)?, cfg(eta, lambda_y)?);
                let (lx, ly) = (cx.scaled_lambda(), cy.scaled_lambda());
                (is_feasible(&cx) && is_feasible(&cy))
                    .then(|| Box::new(move |s| asym_values(s, eta_x, eta, lx, ly)) as Box<_>)
            }
        })
    }
}

/// Outcome of one worst-case test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniversalCheck {
    pub ok: bool,
    /// Smallest condition value found over `αβ` (`-inf` if infeasible).
    pub worst_margin: f64,
    /// `αβ` where the worst margin occurs.
    pub binding_s: Option<f64>,
    /// No machine realizes these parameters.
    pub infeasible: bool,
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, depth: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..depth {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    // the endpoints can be the minimum of a monotone stretch
    [(a, f(a)), (b, f(b)), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty")
}

/// Whether every grid `αβ` (plus a refined neighbourhood of the worst one)
/// satisfies the family's conditions at `eta`.
pub fn universal_ok(
    family: &Family,
    eta: f64,
    settings: &SearchSettings,
) -> Result<UniversalCheck> {
    family.validate()?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
    }
    let Some(eval) = family.evaluator(eta)? else {
        return Ok(UniversalCheck {
            ok: false,
            worst_margin: f64::NEG_INFINITY,
            binding_s: None,
            infeasible: true,
        });
    };
    let margin = |s: f64| eval(s).min_value();
    let pts = settings.grid.points();
    let (idx, grid_min) = pts
        .iter()
        .map(|&s| margin(s))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    let lo = pts[idx.saturating_sub(1)];
    let hi = pts[(idx + 1).min(pts.len() - 1)];
    let (s_ref, m_ref) = golden_min(&margin, lo, hi, settings.grid.refinement_depth());
    let (binding, worst) = if m_ref < grid_min {
        (s_ref, m_ref)
    } else {
        (pts[idx], grid_min)
    };
    Ok(UniversalCheck {
        ok: worst >= -settings.condition_tol,
        worst_margin: worst,
        binding_s: Some(binding),
        infeasible: false,
    })
}

/// Largest universal `η` found by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaMax {
    pub eta_max: f64,
    /// Worst `αβ` just above `eta_max`; `None` when the limit comes from
    /// machine infeasibility or `eta_max = 1`.
    pub binding_s: Option<f64>,
    pub probes: usize,
    pub infeasible_probes: usize,
}

/// Bisection for the largest `η ∈ (0, 1]` where the family is universal.
pub fn maximize_eta(family: &Family, settings: &SearchSettings) -> Result<EtaMax> {
    let tol = settings.bisection_tol;
    let mut probes = 0;
    let mut infeasible_probes = 0;
    let mut probe = |eta: f64| -> Result<UniversalCheck> {
        let c = universal_ok(family, eta, settings)?;
        probes += 1;
        if c.infeasible {
            infeasible_probes += 1;
            log::debug!("infeasible machine at eta = {eta} for {family:?}");
        }
        Ok(c)
    };
    if probe(1.0)?.ok {
        return Ok(EtaMax {
            eta_max: 1.0,
            binding_s: None,
            probes,
            infeasible_probes,
        });
    }
    let bottom = probe(tol)?;
    if !bottom.ok {
        return Ok(EtaMax {
            eta_max: 0.0,
            binding_s: bottom.binding_s,
            probes,
            infeasible_probes,
        });
    }
    let (mut lo, mut hi) = (tol, 1.0);
    let mut failing: Option<UniversalCheck> = None;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let c = probe(mid)?;
        if c.ok {
            lo = mid;
        } else {
            hi = mid;
            failing = Some(c);
        }
    }
    Ok(EtaMax {
        eta_max: lo,
        binding_s: failing.and_then(|c| c.binding_s),
        probes,
        infeasible_probes,
    })
}

/// Machine on `y` only, `λ_y = 0`.
pub fn eta_max_ta(settings: &SearchSettings) -> Result<EtaMax> {
    maximize_eta(&Family::Ta { lambda_y: 0.0 }, settings)
}

/// Identical machines with `λ = √lambda_sq`.
pub fn eta_max_sym(lambda_sq: f64, settings: &SearchSettings) -> Result<EtaMax> {
    if !(0.0..=1.0).contains(&lambda_sq) {
        return Err(Error::Domain(format!(
            "lambda^2 must lie in [0, 1], got {lambda_sq}"
        )));
    }
    maximize_eta(
        &Family::Sym {
            lambda: lambda_sq.sqrt(),
        },
        settings,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub eta_x: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub eta_y_max: f64,
    pub binding_s: Option<f64>,
    pub infeasible_probes: usize,
}

/// Largest universal `η_y` for a fixed `x` machine.
pub fn eta_y_frontier(
    eta_x: f64,
    lambda_x: f64,
    lambda_y: f64,
    settings: &SearchSettings,
) -> Result<FrontierPoint> {
    let fam = Family::Asym {
        eta_x,
        lambda_x,
        lambda_y,
    };
    fam.validate()?;
    let m = maximize_eta(&fam, settings)?;
    Ok(FrontierPoint {
        eta_x,
        lambda_x,
        lambda_y,
        eta_y_max: m.eta_max,
        binding_s: m.binding_s,
        infeasible_probes: m.infeasible_probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    pub lambda_sq: f64,
    pub eta_max: f64,
    pub binding_s: Option<f64>,
    pub grid_n: usize,
    pub tol: f64,
}

/// `η_max(λ²)` for identical machines, one row per input, same order.
pub fn figure1_scan(lambda_sq: &[f64], settings: &SearchSettings) -> Result<Vec<Figure1Row>> {
    lambda_sq
        .par_iter()
        .map(|&l2| {
            let m = eta_max_sym(l2, settings)?;
            Ok(Figure1Row {
                lambda_sq: l2,
                eta_max: m.eta_max,
                binding_s: m.binding_s,
                grid_n: settings.grid.len(),
                tol: settings.bisection_tol,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure2Row {
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub eta_x: f64,
    pub eta_y_max: f64,
    pub binding_s: Option<f64>,
}

/// `η_y,max(η_x)` per `(λx, λy)` pair, pair-major.
pub fn figure2_scan(
    eta_x: &[f64],
    pairs: &[(f64, f64)],
    settings: &SearchSettings,
) -> Result<Vec<Figure2Row>> {
    let jobs: Vec<(f64, f64, f64)> = pairs
        .iter()
        .flat_map(|&(lx, ly)| eta_x.iter().map(move |&ex| (lx, ly, ex)))
        .collect();
    jobs.par_iter()
        .map(|&(lx, ly, ex)| {
            let p = eta_y_frontier(ex, lx, ly, settings)?;
            Ok(Figure2Row {
                lambda_x: lx,
                lambda_y: ly,
                eta_x: ex,
                eta_y_max: p.eta_y_max,
                binding_s: p.binding_s,
            })
        })
        .collect()
}

/// Sign tallies of the `Λ`-carrying part of the third asymmetric condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaResidualBucket {
    pub alpha_beta: f64,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub max_residual: f64,
    pub min_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaResidualReport {
    pub samples: usize,
    pub seed: u64,
    /// Infeasible draws discarded before a feasible one was found.
    pub rejected_infeasible: usize,
    pub buckets: Vec<LambdaResidualBucket>,
}

impl LambdaResidualReport {
    /// Every `αβ > 0` saw at least one positive residual.
    pub fn every_bucket_has_positive(&self) -> bool {
        self.buckets
            .iter()
            .filter(|b| b.alpha_beta > 0.0)
            .all(|b| b.positive > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaResidualOptions {
    pub samples: usize,
    pub seed: u64,
    /// Number of `αβ` buckets, spaced evenly over `(0, 1/2]`.
    pub buckets: usize,
    /// Force both lambdas to zero.
    pub zero_lambda: bool,
}

impl Default for LambdaResidualOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 7,
            buckets: 50,
            zero_lambda: false,
        }
    }
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `(η_x, η_y, λ_x, λ_y)` uniformly over the feasible box.
fn feasible_pair(rng: &mut ChaCha8Rng, zero_lambda: bool) -> (MachineConfig, MachineConfig, usize) {
    let mut rejected = 0;
    loop {
        let mut draw = || {
            let eta = 1.0 - rng.random_range(0.0..1.0);
            let lambda = if zero_lambda {
                0.0
            } else {
                rng.random_range(-1.0..=1.0)
            };
            MachineConfig::new(eta, lambda).expect("in domain")
        };
        let (x, y) = (draw(), draw());
        if is_feasible(&x) && is_feasible(&y) {
            return (x, y, rejected);
        }
        rejected += 1;
    }
}

pub fn lambda_residual_probe(samples: usize, seed: u64) -> LambdaResidualReport {
    lambda_residual_probe_with(&LambdaResidualOptions {
        samples,
        seed,
        ..Default::default()
    })
}

pub fn lambda_residual_probe_with(opts: &LambdaResidualOptions) -> LambdaResidualReport {
    let grid: Vec<f64> = (1..=opts.buckets)
        .map(|k| 0.5 * k as f64 / opts.buckets as f64)
        .collect();
    let draws: Vec<(Vec<f64>, usize)> = (0..opts.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(opts.seed, i);
            let (x, y, rejected) = feasible_pair(&mut rng, opts.zero_lambda);
            let r = grid
                .iter()
                .map(|&s| {
                    asym_third_residual(s, x.eta(), y.eta(), x.scaled_lambda(), y.scaled_lambda())
                })
                .collect();
            (r, rejected)
        })
        .collect();
    let mut buckets: Vec<LambdaResidualBucket> = grid
        .iter()
        .map(|&s| LambdaResidualBucket {
            alpha_beta: s,
            positive: 0,
            negative: 0,
            zero: 0,
            max_residual: f64::NEG_INFINITY,
            min_residual: f64::INFINITY,
        })
        .collect();
    let mut rejected_infeasible = 0;
    for (residuals, rejected) in draws {
        rejected_infeasible += rejected;
        for (b, r) in buckets.iter_mut().zip(residuals) {
            match r.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => b.positive += 1,
                Some(std::cmp::Ordering::Less) => b.negative += 1,
                _ => b.zero += 1,
            }
            b.max_residual = b.max_residual.max(r);
            b.min_residual = b.min_residual.min(r);
        }
    }
    LambdaResidualReport {
        samples: opts.samples,
        seed: opts.seed,
        rejected_infeasible,
        buckets,
    }
}

/// Per-state result of the mixed-input experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MixedOutcome {
    /// A reduced input is `I/2`, so there is nothing to fit.
    Degenerate,
    Checked {
        shrink: ShrinkFactors,
        /// `max(|η'_x − η_x|, |η'_y − η_y|)` plus fit residuals.
        shrink_error: f64,
        /// Channel of `ρ` against the weighted channel of its eigenvectors.
        linearity_residual: f64,
    },
}

/// Runs both machines on `rho` and checks the shrink factors and linearity.
pub fn check_mixed_state(
    rho: &DensityMatrix,
    machine_x: &MachineRealization,
    machine_y: &MachineRealization,
) -> Result<MixedOutcome> {
    let out = simulate_channel(rho, Some(machine_x), Some(machine_y))?;
    let shrink = match reduced_shrink_factors(rho, &out.rho_out) {
        Ok(s) => s,
        Err(Error::DegenerateInput { .. }) => return Ok(MixedOutcome::Degenerate),
        Err(e) => return Err(e),
    };
    let (ex, ey) = (machine_x.config().eta(), machine_y.config().eta());
    let shrink_error = [
        (shrink.x.eta - ex).abs(),
        (shrink.y.eta - ey).abs(),
        shrink.x.residual,
        shrink.y.residual,
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let ens = spectral_decompose(rho)?;
    let mut combined = crate::numerics::ComplexMatrix::zeros(4, 4);
    for (w, psi) in ens.weights.iter().zip(&ens.components) {
        let part = simulate_channel(
            &DensityMatrix::from_pure(psi)?,
            Some(machine_x),
            Some(machine_y),
        )?;
        combined = &combined + &part.matrix().scale_re(*w);
    }
    Ok(MixedOutcome::Checked {
        shrink,
        shrink_error,
        linearity_residual: combined.max_abs_diff(out.matrix()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedStateReport {
    pub samples: usize,
    pub checked: usize,
    pub degenerate: usize,
    pub max_shrink_error: f64,
    pub max_linearity_residual: f64,
}

impl MixedStateReport {
    pub fn passes(&self, shrink_tol: f64, linearity_tol: f64) -> bool {
        self.max_shrink_error <= shrink_tol && self.max_linearity_residual <= linearity_tol
    }
}

/// Random Wishart mixed states through both machines.
pub fn mixed_state_experiment(
    samples: usize,
    cfg_x: &MachineConfig,
    cfg_y: &MachineConfig,
    seed: u64,
) -> Result<MixedStateReport> {
    let (mx, my) = (realize(cfg_x)?, realize(cfg_y)?);
    let outcomes: Vec<MixedOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let rho = sample_state_with(StateKind::Mixed, &mut stream_rng(seed, i));
            check_mixed_state(&rho, &mx, &my)
        })
        .collect::<Result<_>>()?;
    let mut report = MixedStateReport {
        samples,
        checked: 0,
        degenerate: 0,
        max_shrink_error: 0.0,
        max_linearity_residual: 0.0,
    };
    for o in outcomes {
        match o {
            MixedOutcome::Degenerate => report.degenerate += 1,
            MixedOutcome::Checked {
                shrink_error,
                linearity_residual,
                ..
            } => {
                report.checked += 1;
                report.max_shrink_error = report.max_shrink_error.max(shrink_error);
                report.max_linearity_residual =
                    report.max_linearity_residual.max(linearity_residual);
            }
        }
    }
    Ok(report)
}
