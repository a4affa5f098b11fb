use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::commands::{CliError, CliResult};

/// Twelve significant digits, fixed notation where that stays readable.
pub fn fmt(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

/// Empty field for a missing value.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn parse_number(s: &str) -> CliResult<f64> {
    let t = s.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("not a number: {t:?}")))
}

/// `"lx,ly;lx,ly"` into pairs, each λ in `[-1, 1]`.
pub fn parse_pairs(spec: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for item in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let parts: Vec<&str> = item.split(',').collect();
        let [lx, ly] = parts[..] else {
            return Err(CliError::Usage(format!(
                "expected `lambda_x,lambda_y`, got {item:?}"
            )));
        };
        let (lx, ly) = (parse_number(lx)?, parse_number(ly)?);
        if !(-1.0..=1.0).contains(&lx) || !(-1.0..=1.0).contains(&ly) {
            return Err(CliError::Usage(format!(
                "lambdas must lie in [-1, 1], got ({lx}, {ly})"
            )));
        }
        out.push((lx, ly));
    }
    if out.is_empty() {
        return Err(CliError::Usage("the lambda pair list is empty".into()));
    }
    Ok(out)
}

/// Comma-separated `η_x` values in `(0, 1]`.
pub fn parse_eta_grid(spec: &str) -> CliResult<Vec<f64>> {
    let etas = spec
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_number)
        .collect::<CliResult<Vec<f64>>>()?;
    if etas.is_empty() {
        return Err(CliError::Usage("the eta_x grid is empty".into()));
    }
    if let Some(bad) = etas.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(CliError::Usage(format!(
            "eta_x must lie in (0, 1], got {bad}"
        )));
    }
    Ok(etas)
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}
