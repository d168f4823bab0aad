use llg_shrinker::constants::{continuity_scan, ScanRow};
use llg_shrinker::geometry::{angle_limit_scan, increasing_toward_pi, AngleRow};
use llg_shrinker::Params;
use serde::Serialize;

use super::require_format;
use crate::config::{Defaults, Format, RunConfig};
use crate::output::{csv, emit, json, Cell};
use crate::{CliError, ScanAngleArgs, ScanContinuityArgs};

const DEFAULTS: Defaults = Defaults {
    c: 0.5,
    alpha: 0.5,
    format: Format::Json,
};

#[derive(Serialize)]
struct AngleReport<'a> {
    config: &'a RunConfig,
    /// Which parameter is held fixed: `"c"` or `"alpha"`.
    fixed: &'static str,
    rows: &'a [AngleRow],
    /// Trend only; not a pass/fail criterion.
    increasing_toward_pi: bool,
}

#[derive(Serialize)]
struct ContinuityReport<'a> {
    config: &'a RunConfig,
    rows: &'a [ScanRow],
    max_delta_b: Option<f64>,
}

fn check_grid(values: &[f64], what: &str) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("{what} must not be empty")));
    }
    Ok(())
}

pub fn run_angle(args: ScanAngleArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("scan-angle", &args.common, DEFAULTS)?;
    require_format(&cfg, &[Format::Json, Format::Csv])?;
    let (fixed, points): (&'static str, Vec<(f64, f64)>) = match &args.alpha_grid {
        Some(alphas) => {
            check_grid(alphas, "alpha grid")?;
            ("c", alphas.iter().map(|&a| (cfg.c, a)).collect())
        }
        None => {
            let cs = args.c_grid.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0]);
            check_grid(&cs, "c grid")?;
            ("alpha", cs.iter().map(|&c| (c, cfg.alpha)).collect())
        }
    };
    for &(c, a) in &points {
        Params::new(c, a).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let rows = angle_limit_scan(&points, cfg.tol, cfg.budget)?;
    let bytes = match cfg.format {
        Format::Csv => csv(
            "c,alpha,b1,angle_normals,angle_circles,err_est,x_used,flagged",
            rows.iter().map(|r| {
                vec![
                    r.c.into(),
                    r.alpha.into(),
                    r.b1.into(),
                    r.angle_normals.into(),
                    r.angle_circles.into(),
                    r.err_est.into(),
                    r.x_used.into(),
                    r.flagged.into(),
                ]
            }),
        ),
        _ => json(&AngleReport {
            config: &cfg,
            fixed,
            rows: &rows,
            increasing_toward_pi: increasing_toward_pi(&rows),
        })?,
    };
    emit(cfg.output.as_deref(), &bytes)
}

pub fn run_continuity(args: ScanContinuityArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("scan-continuity", &args.common, DEFAULTS)?;
    require_format(&cfg, &[Format::Json, Format::Csv])?;
    let grid = args.c_grid.clone().unwrap_or_else(|| vec![0.4, 0.5, 0.6]);
    check_grid(&grid, "c grid")?;
    let rows = continuity_scan(cfg.alpha, &grid, cfg.tol, cfg.budget)?;
    let bytes = match cfg.format {
        Format::Csv => csv(
            "c,b1,b2,b3,rho1,rho2,rho3,phi1,phi2,phi3,err_est,x_used,flagged,delta_b",
            rows.iter().map(|r| {
                let mut row: Vec<Cell> = vec![r.c.into()];
                row.extend(
                    r.b.iter()
                        .chain(&r.rho)
                        .chain(&r.phi)
                        .map(|&v| Cell::from(v)),
                );
                row.push(r.err_est.into());
                row.push(r.x_used.into());
                row.push(r.flagged.into());
                row.push(r.delta_b.into());
                row
            }),
        ),
        _ => json(&ContinuityReport {
            config: &cfg,
            rows: &rows,
            max_delta_b: rows.iter().filter_map(|r| r.delta_b).reduce(f64::max),
        })?,
    };
    emit(cfg.output.as_deref(), &bytes)
}
