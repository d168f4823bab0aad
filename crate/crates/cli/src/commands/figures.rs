use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use llg_shrinker::frame::{reflect, AugmentedState, Trace};
use llg_shrinker::geometry::build_geometry;
use llg_shrinker::vec3::Vec3;
use llg_shrinker::Params;
use serde::Serialize;

use super::{pipeline, require_format, TraceSummary};
use crate::config::{Defaults, Format, RunConfig};
use crate::output::{csv, json, write_atomic, Cell};
use crate::{CliError, FigureArgs};

/// Figure-specific summaries; absent keys are omitted.
#[derive(Debug, Default, Serialize)]
struct Extras {
    #[serde(skip_serializing_if = "Option::is_none")]
    b1_max_dev_from_minus_one_beyond_8_5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m1_min_on_0_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b1_max_abs_on_0_2: Option<f64>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    figure: u32,
    config: &'a RunConfig,
    params: Params,
    trace: TraceSummary,
    data_file: String,
    columns: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    circles_file: Option<String>,
    b_plus: Vec3,
    b_minus: Vec3,
    b1: f64,
    /// `arccos(B⁺·B⁻)`.
    angle_normals: f64,
    /// `π − angle_normals`.
    angle_circles: f64,
    err_est: f64,
    degraded: bool,
    #[serde(flatten)]
    extras: Extras,
}

const TRAJECTORY: &str = "x,m1,m2,m3";
const CIRCLES: &str = "theta,cp1,cp2,cp3,cm1,cm2,cm3";
const CIRCLE_POINTS: usize = 360;

/// State at `x` of either sign via the parity map.
fn state(trace: &Trace, x: f64) -> Result<AugmentedState, CliError> {
    let s = trace.frame_at(x.abs())?;
    Ok(if x < 0.0 { reflect(&s) } else { s })
}

/// `lo, lo + h, …` clipped to `[lo, hi]`, always including both ends.
fn grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h).floor() as usize;
    let mut xs: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * h).min(hi)).collect();
    xs.dedup();
    if xs.last().is_none_or(|&x| x < hi) {
        xs.push(hi);
    }
    xs
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn run(args: FigureArgs) -> Result<(), CliError> {
    let id = args.id;
    let c = match id {
        1 | 2 => 0.5,
        3 | 4 => 0.01,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown figure id {id}; expected 1, 2, 3 or 4"
            )))
        }
    };
    let defaults = Defaults {
        c,
        alpha: 0.5,
        format: Format::Csv,
    };
    let cfg = RunConfig::resolve("figures", &args.common, defaults)?;
    require_format(&cfg, &[Format::Csv])?;
    if !(args.spacing > 0.0) {
        return Err(CliError::Usage(format!(
            "spacing must be positive, got {}",
            args.spacing
        )));
    }
    let output = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("figure{id}.csv")));
    let run = pipeline(&cfg)?;
    let (trace, lc) = (&run.trace, &run.lc);
    let geom = build_geometry(lc)?;
    let x_max = trace.x_max;
    let h = args.spacing;

    let (columns, rows): (&'static str, Vec<Vec<Cell>>) = match id {
        1 | 4 => {
            let rows = grid(-x_max, x_max, h)
                .into_iter()
                .map(|x| {
                    let m = state(trace, x)?.frame.m;
                    Ok(vec![x.into(), m[0].into(), m[1].into(), m[2].into()])
                })
                .collect::<Result<_, CliError>>()?;
            (TRAJECTORY, rows)
        }
        2 => {
            let rows = grid(0.0, x_max, h)
                .into_iter()
                .map(|x| {
                    let f = state(trace, x)?.frame;
                    Ok(vec![x.into(), f.m[0].into(), f.n[0].into(), f.b[0].into()])
                })
                .collect::<Result<_, CliError>>()?;
            ("x,m1,n1,b1", rows)
        }
        _ => {
            let rows = grid(0.0, x_max, h)
                .into_iter()
                .map(|x| {
                    let f = state(trace, x)?.frame;
                    Ok(vec![x.into(), f.m[0].into(), f.b[0].into()])
                })
                .collect::<Result<_, CliError>>()?;
            ("x,m1,b1", rows)
        }
    };

    let mut extras = Extras::default();
    if id == 3 {
        let mut beyond = 0.0f64;
        let (mut m1_min, mut b1_abs) = (f64::INFINITY, 0.0f64);
        for x in grid(0.0, x_max, h) {
            let f = state(trace, x)?.frame;
            if x >= 8.5 {
                beyond = beyond.max((f.b[0] + 1.0).abs());
            }
            if x <= 2.0 {
                m1_min = m1_min.min(f.m[0]);
                b1_abs = b1_abs.max(f.b[0].abs());
            }
        }
        extras.b1_max_dev_from_minus_one_beyond_8_5 = (x_max >= 8.5).then_some(beyond);
        extras.m1_min_on_0_2 = Some(m1_min);
        extras.b1_max_abs_on_0_2 = Some(b1_abs);
    }

    // Limit circles parametrized as ρ^±_j cos(θ − φ_j), ρ⁻ = (ρ₁, −ρ₂, −ρ₃).
    let circles_path = (id == 1).then(|| sibling(&output, "_circles", "csv"));
    if let Some(path) = &circles_path {
        let rows = (0..=CIRCLE_POINTS).map(|i| {
            let theta = TAU * i as f64 / CIRCLE_POINTS as f64;
            let mut row: Vec<Cell> = vec![theta.into()];
            for sign in [1.0, -1.0] {
                for j in 0..3 {
                    let s = if j == 0 { 1.0 } else { sign };
                    row.push((s * lc.rho[j] * (theta - lc.phi[j]).cos()).into());
                }
            }
            row
        });
        write_atomic(path, &csv(CIRCLES, rows))?;
    }

    write_atomic(&output, &csv(columns, rows))?;
    let sidecar = Sidecar {
        figure: id,
        config: &cfg,
        params: run.params,
        trace: TraceSummary::of(trace),
        data_file: file_name(&output),
        columns,
        circles_file: circles_path.as_deref().map(file_name),
        b_plus: geom.b_plus,
        b_minus: geom.b_minus,
        b1: lc.b[0],
        angle_normals: geom.angle_normals,
        angle_circles: geom.angle_circles,
        err_est: lc.err_est,
        degraded: lc.degraded,
        extras,
    };
    write_atomic(&sibling(&output, "", "json"), &json(&sidecar)?)?;
    Ok(())
}
