use std::path::{Path, PathBuf};

use disentangle_core::channel::side_shrink_factor;
use disentangle_core::frontier::{
    figure1_scan, figure2_scan, SearchSettings, UniversalityGrid, DEFAULT_REFINEMENT_DEPTH,
};
use disentangle_core::machine::{is_feasible, MachineConfig};
use disentangle_core::numerics::Subsystem;
use disentangle_core::separability::{
    closed_form_output, cross_validate, Agreement, CrossValidation,
};
use disentangle_core::states::{pure_state_density, TwoQubitPureState};
use disentangle_core::verify::{run_suite, Suite};
use serde::Serialize;

use crate::output::{parse_eta_grid, parse_pairs, write_csv};
use crate::{CheckArgs, Figure1Args, Figure2Args, ScanArgs, SuiteArg, VerifyArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] disentangle_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Inconsistent(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct ShrinkReport {
    x: Option<f64>,
    y: Option<f64>,
}

#[derive(Serialize)]
struct CheckReport {
    alpha: f64,
    beta: f64,
    alpha_beta: f64,
    #[serde(flatten)]
    result: CrossValidation,
    shrink_factors: ShrinkReport,
}

fn machine(eta: Option<f64>, lambda: f64, side: &str) -> CliResult<Option<MachineConfig>> {
    let Some(eta) = eta else { return Ok(None) };
    let cfg = MachineConfig::new(eta, lambda)?;
    if !is_feasible(&cfg) {
        return Err(CliError::Usage(format!(
            "no machine on {side} realizes eta = {eta}, lambda = {lambda} (needs lambda^2 <= (1-eta)/(1+eta))"
        )));
    }
    Ok(Some(cfg))
}

pub fn check(a: &CheckArgs) -> CliResult<()> {
    if a.tol.is_nan() || a.tol < 0.0 {
        return Err(CliError::Usage(format!(
            "tolerance must be non-negative, got {}",
            a.tol
        )));
    }
    let st = TwoQubitPureState::from_alpha(a.alpha)?;
    let cx = machine(a.eta_x, a.lambda_x, "x")?;
    let cy = machine(a.eta_y, a.lambda_y, "y")?;
    if cx.is_none() && cy.is_none() {
        return Err(CliError::Usage("give --eta-x, --eta-y or both".into()));
    }
    let result = cross_validate(&st, cx.as_ref(), cy.as_ref(), a.tol)?;

    let rho_in = pure_state_density(&st);
    let (_, out) = closed_form_output(&st, cx.as_ref(), cy.as_ref())?;
    let rho_out = out.rho_out;
    let fit = |side| {
        side_shrink_factor(&rho_in, &rho_out, side)
            .ok()
            .map(|f| f.eta)
    };
    let report = CheckReport {
        alpha: st.alpha(),
        beta: st.beta(),
        alpha_beta: st.schmidt_product(),
        shrink_factors: ShrinkReport {
            x: fit(Subsystem::First),
            y: fit(Subsystem::Second),
        },
        result,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if report.result.agreement == Agreement::HardFailure {
        return Err(CliError::Inconsistent(format!(
            "conditions hold but the smallest partial-transpose eigenvalue is {:e}",
            report.result.verdict.min_pt_eigenvalue
        )));
    }
    Ok(())
}

fn settings(scan: &ScanArgs) -> CliResult<SearchSettings> {
    if !(scan.tol > 0.0 && scan.tol < 0.5) {
        return Err(CliError::Usage(format!(
            "bisection tolerance must lie in (0, 0.5), got {}",
            scan.tol
        )));
    }
    Ok(SearchSettings {
        grid: UniversalityGrid::uniform(scan.s_points, DEFAULT_REFINEMENT_DEPTH)?,
        bisection_tol: scan.tol,
        ..Default::default()
    })
}

fn out_path(scan: &ScanArgs, default_name: &str) -> PathBuf {
    scan.out
        .clone()
        .unwrap_or_else(|| scan.out_dir.join(default_name))
}

fn report_written(path: &Path, rows: usize) {
    println!("wrote {rows} rows to {}", path.display());
}

pub fn figure1(a: &Figure1Args) -> CliResult<()> {
    if a.grid_size < 2 {
        return Err(CliError::Usage(format!(
            "--grid-size must be at least 2, got {}",
            a.grid_size
        )));
    }
    let s = settings(&a.scan)?;
    let grid: Vec<f64> = (0..a.grid_size)
        .map(|i| i as f64 / (a.grid_size - 1) as f64)
        .collect();
    let rows = figure1_scan(&grid, &s)?;
    let path = out_path(&a.scan, "figure1.csv");
    write_csv(
        &path,
        &["lambda_sq", "eta_max", "binding_s", "grid_n", "tol"],
        rows.iter().map(|r| {
            vec![
                crate::output::fmt(r.lambda_sq),
                crate::output::fmt(r.eta_max),
                crate::output::fmt_opt(r.binding_s),
                r.grid_n.to_string(),
                crate::output::fmt(r.tol),
            ]
        }),
    )?;
    report_written(&path, rows.len());
    Ok(())
}

pub fn figure2(a: &Figure2Args) -> CliResult<()> {
    let pairs = parse_pairs(&a.pairs)?;
    let etas = parse_eta_grid(&a.eta_x_grid)?;
    let s = settings(&a.scan)?;
    let rows = figure2_scan(&etas, &pairs, &s)?;
    let path = out_path(&a.scan, "figure2.csv");
    write_csv(
        &path,
        &["lambda_x", "lambda_y", "eta_x", "eta_y_max", "binding_s"],
        rows.iter().map(|r| {
            vec![
                crate::output::fmt(r.lambda_x),
                crate::output::fmt(r.lambda_y),
                crate::output::fmt(r.eta_x),
                crate::output::fmt(r.eta_y_max),
                crate::output::fmt_opt(r.binding_s),
            ]
        }),
    )?;
    report_written(&path, rows.len());
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> CliResult<()> {
    let suite = match a.suite {
        SuiteArg::Quick => Suite::Quick,
        SuiteArg::Full => Suite::Full,
    };
    let summary = run_suite(suite, a.seed)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if !summary.passed {
        let failed: Vec<_> = summary
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        return Err(CliError::Inconsistent(format!(
            "failed checks: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}
