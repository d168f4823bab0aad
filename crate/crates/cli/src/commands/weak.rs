use llg_shrinker::geometry::{build_geometry, dist_to_circle};
use llg_shrinker::selfsimilar::{
    default_bump, gaussian_moments, weak_limit_scan, Bump, GaussianMoments, ShrinkerSolution,
    TestFunction,
};
use llg_shrinker::vec3::Vec3;
use llg_shrinker::Params;
use serde::Serialize;

use super::{pipeline, require_format, TraceSummary};
use crate::config::{Defaults, Format, RunConfig};
use crate::output::{csv, emit, json, Cell};
use crate::{CliError, WeakLimitArgs};

/// Final pairing must stay below this fraction of `‖φ‖₁`.
const THRESHOLD: f64 = 0.05;

#[derive(Serialize)]
struct BumpInfo {
    center: f64,
    radius: f64,
    amplitude: Vec3,
    l1_norm: f64,
    sup_norm: f64,
    lipschitz: f64,
}

#[derive(Serialize)]
struct Row {
    t: f64,
    /// `T − t`.
    s: f64,
    value: f64,
    tail_bound: f64,
    xi_cut: f64,
    /// `(|value| + tail_bound) / ‖φ‖₁`.
    normalized: f64,
}

#[derive(Serialize)]
struct WeakReport<'a> {
    config: &'a RunConfig,
    params: Params,
    trace: TraceSummary,
    bump: BumpInfo,
    rows: Vec<Row>,
    gaussian_moments: Vec<GaussianMoments>,
    threshold: f64,
    decreasing: bool,
    final_below_threshold: bool,
    pass: bool,
}

pub fn run(args: WeakLimitArgs) -> Result<(), CliError> {
    let defaults = Defaults {
        c: 0.5,
        alpha: 0.5,
        format: Format::Json,
    };
    let cfg = RunConfig::resolve("weak-limit", &args.common, defaults)?;
    require_format(&cfg, &[Format::Json, Format::Csv])?;
    let s_grid = args.s_grid.clone().unwrap_or_else(|| vec![0.1, 0.01, 1e-3]);
    if s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(CliError::Usage(
            "s-grid values (T - t) must be positive".into(),
        ));
    }
    if !(args.radius > 0.0) || !args.center.is_finite() {
        return Err(CliError::Usage(
            "bump radius must be positive and center finite".into(),
        ));
    }
    if !(args.spacing > 0.0) {
        return Err(CliError::Usage(format!(
            "spacing must be positive, got {}",
            args.spacing
        )));
    }
    let bump = Bump {
        center: args.center,
        radius: args.radius,
        ..default_bump()
    };

    let run = pipeline(&cfg)?;
    let sol = ShrinkerSolution::new(run.trace.clone(), cfg.t_blow);
    let t_grid: Vec<f64> = s_grid.iter().map(|s| cfg.t_blow - s).collect();

    let bytes = match cfg.format {
        Format::Csv => self_similar_csv(&sol, &run.lc, &bump, &t_grid, args.spacing)?,
        _ => {
            let scan = weak_limit_scan(&sol, &run.lc, &bump, &t_grid, None)?;
            let l1 = bump.l1_norm();
            let rows: Vec<Row> = scan
                .iter()
                .zip(&s_grid)
                .map(|(r, &s)| Row {
                    t: r.t,
                    s,
                    value: r.value,
                    tail_bound: r.tail_bound,
                    xi_cut: r.xi_cut,
                    normalized: (r.value.abs() + r.tail_bound) / l1,
                })
                .collect();
            let gaussian_moments = s_grid
                .iter()
                .map(|&s| gaussian_moments(cfg.alpha, s))
                .collect::<Result<Vec<_>, _>>()?;
            let first = rows.first().map(|r| r.normalized).unwrap_or(0.0);
            let last = rows.last().map(|r| r.normalized).unwrap_or(0.0);
            let decreasing = rows.len() < 2 || last < first;
            let final_below_threshold = last < THRESHOLD;
            let report = WeakReport {
                config: &cfg,
                params: run.params,
                trace: TraceSummary::of(&run.trace),
                bump: BumpInfo {
                    center: bump.center,
                    radius: bump.radius,
                    amplitude: bump.amplitude,
                    l1_norm: l1,
                    sup_norm: bump.sup_norm(),
                    lipschitz: bump.lipschitz(),
                },
                rows,
                gaussian_moments,
                threshold: THRESHOLD,
                decreasing,
                final_below_threshold,
                pass: decreasing && final_below_threshold,
            };
            let bytes = json(&report)?;
            if !report.pass {
                emit(cfg.output.as_deref(), &bytes)?;
                return Err(CliError::Verification(vec!["weak_limit".into()]));
            }
            bytes
        }
    };
    emit(cfg.output.as_deref(), &bytes)
}

/// `t,x,m1,m2,m3,dist_circle,grad_mag` over the bump support at each time,
/// restricted to points the trace covers.
fn self_similar_csv(
    sol: &ShrinkerSolution,
    lc: &llg_shrinker::constants::LimitConstants,
    bump: &Bump,
    t_grid: &[f64],
    h: f64,
) -> Result<Vec<u8>, CliError> {
    let geom = build_geometry(lc)?;
    let (lo, hi) = bump.support();
    let n = ((hi - lo) / h).round() as usize;
    let mut rows = Vec::new();
    for &t in t_grid {
        let reach = sol.trace.x_max * (sol.t_blow - t).sqrt();
        for i in 0..=n {
            let x = (lo + i as f64 * h).min(hi);
            if x.abs() > reach {
                continue;
            }
            let m = sol.eval(x, t)?;
            let normal = if x >= 0.0 { geom.b_plus } else { geom.b_minus };
            rows.push(vec![
                Cell::from(t),
                x.into(),
                m[0].into(),
                m[1].into(),
                m[2].into(),
                dist_to_circle(&m, &normal)?.into(),
                sol.grad_magnitude(x, t)?.into(),
            ]);
        }
    }
    Ok(csv("t,x,m1,m2,m3,dist_circle,grad_mag", rows))
}
